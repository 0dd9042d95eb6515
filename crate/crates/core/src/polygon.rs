//! The feasible (disparity, utility) region of a fixed population and its
//! Pareto frontier.
//!
//! Disparity and utility are affine in the four cell selection fractions, so
//! the region reachable by randomized classifiers is the convex hull of the
//! images of the 16 corners of the unit cube. The efficient frontier is the
//! segment from the utility-optimal zero-disparity classifier `(0, u_f)` to
//! the perfect classifier `(delta_star, 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};
use crate::population::{check_lambda, metrics, CellClassifier, Group, GroupTally};

/// A `(delta, utility)` pair.
pub type Point = (f64, f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasiblePolygon {
    /// Counterclockwise, starting from the lowest-delta vertex, no collinear vertices.
    pub vertices: Vec<Point>,
    pub lambda: f64,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain; drops collinear points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-15 && (a.1 - b.1).abs() <= 1e-15);
    if pts.len() < 3 {
        return pts;
    }
    let scale = pts
        .iter()
        .fold(1.0f64, |m, p| m.max(p.0.abs()).max(p.1.abs()));
    let eps = 1e-14 * scale * scale;

    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

impl FeasiblePolygon {
    /// Whether `p` lies in the polygon, allowing `tol` slack in distance.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        let v = &self.vertices;
        match v.len() {
            0 => false,
            1 => (p.0 - v[0].0).hypot(p.1 - v[0].1) <= tol,
            2 => dist_to_segment(p, v[0], v[1]) <= tol,
            n => (0..n).all(|i| {
                let a = v[i];
                let b = v[(i + 1) % n];
                let len = (b.0 - a.0).hypot(b.1 - a.1);
                cross(a, b, p) >= -tol * len
            }),
        }
    }

    pub fn has_vertex(&self, p: Point, tol: f64) -> bool {
        self.vertices
            .iter()
            .any(|v| (v.0 - p.0).abs() <= tol && (v.1 - p.1).abs() <= tol)
    }
}

fn dist_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return (p.0 - a.0).hypot(p.1 - a.1);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Convex hull of the 16 extreme classifiers' `(delta, utility)` images.
pub fn feasible_polygon(tally: &GroupTally, lambda: f64) -> Result<FeasiblePolygon> {
    let mut images = Vec::with_capacity(16);
    for mask in 0u8..16 {
        let bit = |i: u8| f64::from((mask >> i) & 1);
        let c = CellClassifier::new(bit(0), bit(1), bit(2), bit(3))?;
        let m = metrics(tally, &c, lambda)?;
        images.push((m.delta, m.utility));
    }
    Ok(FeasiblePolygon {
        vertices: convex_hull(&images),
        lambda,
    })
}

/// Image of every deterministic classifier: one point per integer selection
/// vector `k` with `0 <= k[cell] <= n[cell]`.
pub fn deterministic_grid(tally: &GroupTally, lambda: f64, cap: u128) -> Result<Vec<Point>> {
    check_lambda(lambda)?;
    tally.check_metric_domain()?;
    let cells = [tally.n_1_pos, tally.n_1_neg, tally.n_2_pos, tally.n_2_neg];
    let required: u128 = cells.iter().map(|&c| u128::from(c) + 1).product();
    if required > cap {
        return Err(LdaError::GridTooLarge { required, cap });
    }
    let n1 = tally.n_group(Group::One) as f64;
    let n2 = tally.n_group(Group::Two) as f64;
    let n_pos = tally.n_pos() as f64;
    let n_neg = tally.n_neg() as f64;

    let mut out = Vec::with_capacity(required as usize);
    for k1p in 0..=cells[0] {
        for k1n in 0..=cells[1] {
            let sr_1 = (k1p + k1n) as f64 / n1;
            for k2p in 0..=cells[2] {
                for k2n in 0..=cells[3] {
                    let sr_2 = (k2p + k2n) as f64 / n2;
                    let tpr = (k1p + k2p) as f64 / n_pos;
                    let fpr = (k1n + k2n) as f64 / n_neg;
                    out.push((sr_1 - sr_2, tpr - lambda * fpr));
                }
            }
        }
    }
    Ok(out)
}

/// Which perturbation of the perfect classifier the repair applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapType {
    /// Deselect positives of the advantaged group 1.
    DeselectGroup1Positives,
    /// Select negatives of the disadvantaged group 2.
    SelectGroup2Negatives,
    /// Base rates are equal; nothing to repair.
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrontierSummary {
    pub lambda: f64,
    /// Disparity of the perfect classifier, `BR_1 - BR_2`.
    pub delta_star: f64,
    pub u_star: f64,
    pub u_f: f64,
    /// `min(n_1 / n_+, lambda * n_2 / n_-)`: utility lost per unit of disparity removed.
    pub min_ratio: f64,
    pub swap: SwapType,
    pub repair: CellClassifier,
}

impl FrontierSummary {
    /// End points of the efficient frontier, `(0, u_f)` then `(delta_star, 1)`.
    pub fn frontier(&self) -> [Point; 2] {
        [(0.0, self.u_f), (self.delta_star, 1.0)]
    }
}

fn check_orientation(tally: &GroupTally) -> Result<()> {
    let br1 = tally.base_rate(Group::One)?;
    let br2 = tally.base_rate(Group::Two)?;
    // Compare exactly: n1+ * n2 vs n2+ * n1.
    let lhs = u128::from(tally.n_1_pos) * u128::from(tally.n_group(Group::Two));
    let rhs = u128::from(tally.n_2_pos) * u128::from(tally.n_group(Group::One));
    if lhs < rhs {
        return Err(LdaError::GroupOrientation { br1, br2 });
    }
    Ok(())
}

struct Ratios {
    swap_a: f64,
    swap_d: f64,
}

fn swap_ratios(tally: &GroupTally, lambda: f64) -> Ratios {
    Ratios {
        swap_a: tally.n_group(Group::One) as f64 / tally.n_pos() as f64,
        swap_d: lambda * tally.n_group(Group::Two) as f64 / tally.n_neg() as f64,
    }
}

/// Zero-disparity classifier of maximal utility, obtained from the perfect
/// classifier by whichever swap type costs less utility per unit disparity.
pub fn zero_disparity_repair(tally: &GroupTally, lambda: f64) -> Result<CellClassifier> {
    Ok(repair_with_type(tally, lambda)?.0)
}

fn repair_with_type(tally: &GroupTally, lambda: f64) -> Result<(CellClassifier, SwapType)> {
    check_lambda(lambda)?;
    tally.check_metric_domain()?;
    check_orientation(tally)?;
    if u128::from(tally.n_1_pos) * u128::from(tally.n_group(Group::Two))
        == u128::from(tally.n_2_pos) * u128::from(tally.n_group(Group::One))
    {
        return Ok((CellClassifier::PERFECT, SwapType::None));
    }
    let r = swap_ratios(tally, lambda);
    let n1 = tally.n_group(Group::One) as f64;
    let n2 = tally.n_group(Group::Two) as f64;
    let mut c = CellClassifier::PERFECT;
    if r.swap_a < r.swap_d {
        // sr_1 = p * n1+ / n1 must drop to BR_2.
        c.p_1_pos = (tally.n_2_pos as f64 * n1) / (n2 * tally.n_1_pos as f64);
        Ok((c, SwapType::DeselectGroup1Positives))
    } else {
        // sr_2 = (n2+ + p * n2-) / n2 must rise to BR_1.
        c.p_2_neg = (tally.n_1_pos as f64 * n2 / n1 - tally.n_2_pos as f64) / tally.n_2_neg as f64;
        Ok((c, SwapType::SelectGroup2Negatives))
    }
}

/// Utility threshold below which a zero-disparity alternative with at least
/// the same utility exists. Requires group 1 to have the higher base rate.
pub fn utility_threshold(tally: &GroupTally, lambda: f64) -> Result<FrontierSummary> {
    let (repair, swap) = repair_with_type(tally, lambda)?;
    let delta_star = tally.base_rate(Group::One)? - tally.base_rate(Group::Two)?;
    let r = swap_ratios(tally, lambda);
    let min_ratio = r.swap_a.min(r.swap_d);
    let u_star = 1.0 - min_ratio * delta_star;
    let u_f = metrics(tally, &repair, lambda)?.utility;
    Ok(FrontierSummary {
        lambda,
        delta_star,
        u_star,
        u_f,
        min_ratio,
        swap,
        repair,
    })
}

/// Smallest absolute disparity achievable by a randomized classifier with utility at least `u0`.
pub fn min_disparity_at_utility(tally: &GroupTally, lambda: f64, u0: f64) -> Result<f64> {
    if !u0.is_finite() {
        return Err(LdaError::InvalidParameter(format!("utility must be finite, got {u0}")));
    }
    if u0 > 1.0 {
        return Err(LdaError::UtilityUnachievable(u0));
    }
    let s = utility_threshold(tally, lambda)?;
    if u0 <= s.u_star {
        return Ok(0.0);
    }
    let d = (u0 - s.u_f) / s.min_ratio;
    Ok(d.clamp(0.0, s.delta_star))
}
