//! Instance files: a CSV `id,rho1,rho2,sigma` plus a JSON sidecar holding
//! lambda, the baseline selection and the optional digit bound.
//!
//! Probabilities may be written as decimals (`0.125`) or fractions (`1/8`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{format_rational, parse_rational, FullInfoInstance, ValueRecord};
use crate::error::{LdaError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSidecar {
    #[serde(with = "number_or_string")]
    pub lambda: String,
    pub baseline: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digits: Option<u32>,
}

mod number_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(serde_json::Number),
    }

    pub fn serialize<S: Serializer>(v: &str, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
        Ok(match Raw::deserialize(d)? {
            Raw::Text(t) => t,
            Raw::Number(n) => n.to_string(),
        })
    }
}

const HEADER: [&str; 4] = ["id", "rho1", "rho2", "sigma"];

pub fn read_instance_str(csv_text: &str, sidecar_json: &str) -> Result<FullInfoInstance> {
    let sidecar: InstanceSidecar = serde_json::from_str(sidecar_json)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(LdaError::Parse {
            line: 1,
            message: format!("expected header `{}`, found `{}`", HEADER.join(","), header.join(",")),
        });
    }
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != HEADER.len() {
            return Err(LdaError::Parse {
                line,
                message: format!("expected {} fields, found {}", HEADER.len(), record.len()),
            });
        }
        let field = |k: usize| {
            parse_rational(&record[k]).map_err(|e| LdaError::Parse {
                line,
                message: format!("column `{}`: {e}", HEADER[k]),
            })
        };
        values.push(ValueRecord {
            id: record[0].to_string(),
            rho1: field(1)?,
            rho2: field(2)?,
            sigma: field(3)?,
        });
    }
    let lambda = parse_rational(&sidecar.lambda)?;
    FullInfoInstance::new(values, lambda, sidecar.baseline.into_iter().collect(), sidecar.digits)
}

pub fn read_instance(csv_path: &Path, sidecar_path: &Path) -> Result<FullInfoInstance> {
    read_instance_str(&fs::read_to_string(csv_path)?, &fs::read_to_string(sidecar_path)?)
}

pub fn instance_to_strings(instance: &FullInfoInstance) -> Result<(String, String)> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(HEADER)?;
    for v in &instance.values {
        writer.write_record([
            v.id.clone(),
            format_rational(&v.rho1),
            format_rational(&v.rho2),
            format_rational(&v.sigma),
        ])?;
    }
    let csv_bytes = writer.into_inner().map_err(|e| LdaError::Io(e.into_error()))?;
    let sidecar = InstanceSidecar {
        lambda: format_rational(&instance.lambda),
        baseline: instance.baseline.iter().cloned().collect(),
        digits: instance.digits,
    };
    let csv_text = String::from_utf8(csv_bytes).map_err(|e| LdaError::Internal(e.to_string()))?;
    Ok((csv_text, serde_json::to_string_pretty(&sidecar)? + "\n"))
}

pub fn write_instance(instance: &FullInfoInstance, csv_path: &Path, sidecar_path: &Path) -> Result<()> {
    let (csv_text, sidecar) = instance_to_strings(instance)?;
    fs::write(csv_path, csv_text)?;
    fs::write(sidecar_path, sidecar)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::testutil::q;
    use super::super::*;
    use super::*;

    const CSV: &str = "id,rho1,rho2,sigma\na,0.5,0.25,1\nb,1/2,0.75,0\n";

    #[test]
    fn reads_decimals_and_fractions() {
        let inst = read_instance_str(CSV, r#"{"lambda": 1.5, "baseline": ["a"]}"#).unwrap();
        assert_eq!(inst.values[1].rho1, q("0.5"));
        assert_eq!(inst.lambda, q("3/2"));
        assert_eq!(inst.digits, None);
        let inst = read_instance_str(CSV, r#"{"lambda": "2", "baseline": [], "digits": 2}"#).unwrap();
        assert_eq!(inst.digits, Some(2));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = "id,rho1,rho2,sigma\na,0.5,0.25,1\nb,half,0.75,0\n";
        let err = read_instance_str(bad, r#"{"lambda": 1, "baseline": []}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("rho1"), "{msg}");

        let err = read_instance_str("id,r1,r2,s\n", r#"{"lambda": 1, "baseline": []}"#).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let (c, s) = (dir.path().join("i.csv"), dir.path().join("i.json"));
        for inst in [
            generate_instance(5, 3, 7).unwrap(),
            reduce_subset_sum(&SubsetSumInstance::new(vec![3, -1, -2]).unwrap(), q("0.5")).unwrap(),
        ] {
            write_instance(&inst, &c, &s).unwrap();
            assert_eq!(read_instance(&c, &s).unwrap(), inst);
        }
    }
}
