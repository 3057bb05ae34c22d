//! Instance files.
//!
//! Instances are TOML documents:
//!
//! ```toml
//! N = 2            # arms
//! M = 2            # environment states
//! nu = [[0.5, 0.5], [0.25, 0.75]]   # N rows of M probabilities, row x is nu_x
//! f = [[1, 0], [1, 0]]              # N rows of M rewards in {0, 1}
//! alpha = [0.6, 0.8]                # optional agent amplitudes, default uniform
//! ```
//!
//! Register index of `|x y>` is `x * M + y`. Rows of `nu` (and the squared norm
//! of `alpha`) within `1e-6` of 1 are renormalized with a warning; larger
//! deviations are rejected.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bandit::{BanditInstance, RENORMALIZE_TOL, ROW_SUM_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(rename = "N")]
    arms: usize,
    #[serde(rename = "M")]
    env: usize,
    nu: Vec<Vec<f64>>,
    f: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
}

/// A validated instance with its optional preparation amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadedInstance {
    pub instance: BanditInstance,
    pub alpha: Option<Vec<Complex64>>,
    pub warnings: Vec<String>,
}

pub fn load_instance(path: &Path) -> Result<LoadedInstance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&text, &path.display().to_string())
}

pub fn parse_instance(text: &str, source_name: &str) -> Result<LoadedInstance> {
    let parse_err = |message: String| Error::Parse { source_name: source_name.to_string(), message };
    let file: InstanceFile = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;

    if file.nu.len() != file.arms {
        return Err(parse_err(format!("field `nu`: {} rows, but N = {}", file.nu.len(), file.arms)));
    }
    if file.f.len() != file.arms {
        return Err(parse_err(format!("field `f`: {} rows, but N = {}", file.f.len(), file.arms)));
    }
    for (x, (nu_row, f_row)) in file.nu.iter().zip(&file.f).enumerate() {
        if nu_row.len() != file.env {
            return Err(parse_err(format!(
                "field `nu`, row {x}: {} entries, but M = {}",
                nu_row.len(),
                file.env
            )));
        }
        if f_row.len() != file.env {
            return Err(parse_err(format!(
                "field `f`, row {x}: {} entries, but M = {}",
                f_row.len(),
                file.env
            )));
        }
        if let Some(y) = f_row.iter().position(|v| *v != 0 && *v != 1) {
            return Err(parse_err(format!("field `f`, row {x}, column {y}: {} is not 0 or 1", f_row[y])));
        }
    }

    let rewards = file.f.iter().map(|row| row.iter().map(|&v| v == 1).collect()).collect();
    let (instance, mut warnings) = BanditInstance::with_warnings(file.nu, rewards)?;

    let alpha = match file.alpha {
        None => None,
        Some(values) => {
            if values.len() != file.arms {
                return Err(parse_err(format!(
                    "field `alpha`: {} entries, but N = {}",
                    values.len(),
                    file.arms
                )));
            }
            let norm_sqr: f64 = values.iter().map(|v| v * v).sum();
            let drift = (norm_sqr - 1.0).abs();
            if !norm_sqr.is_finite() || drift > RENORMALIZE_TOL {
                return Err(Error::InvalidInstance(format!(
                    "alpha has squared norm {norm_sqr}, expected 1"
                )));
            }
            let scale = if drift > ROW_SUM_TOL {
                warnings.push(format!("alpha has squared norm {norm_sqr}; renormalized"));
                norm_sqr.sqrt()
            } else {
                1.0
            };
            Some(values.iter().map(|v| Complex64::new(v / scale, 0.0)).collect())
        }
    };
    for w in &warnings {
        log::warn!("{source_name}: {w}");
    }
    Ok(LoadedInstance { instance, alpha, warnings })
}

/// Serializes an instance in the file format. Only the real parts of `alpha`
/// are representable.
pub fn write_instance(inst: &BanditInstance, alpha: Option<&[Complex64]>) -> Result<String> {
    if let Some(a) = alpha {
        if a.iter().any(|z| z.im != 0.0) {
            return Err(Error::InvalidParameter("instance files hold real amplitudes only".into()));
        }
    }
    let file = InstanceFile {
        arms: inst.n_arms(),
        env: inst.n_env(),
        nu: inst.nu_rows().to_vec(),
        f: inst
            .reward_rows()
            .iter()
            .map(|row| row.iter().map(|&b| i64::from(b)).collect())
            .collect(),
        alpha: alpha.map(|a| a.iter().map(|z| z.re).collect()),
    };
    toml::to_string(&file).map_err(|e| Error::InvalidParameter(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let loaded = parse_instance("N = 1\nM = 1\nnu = [[1.0]]\nf = [[1]]\n", "inline").unwrap();
        assert_eq!(loaded.instance.arm_values(), vec![1.0]);
        assert_eq!(loaded.alpha, None);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn near_unit_row_is_renormalized() {
        let text = "N = 1\nM = 2\nnu = [[0.4999995, 0.5]]\nf = [[1, 0]]\n";
        let loaded = parse_instance(text, "inline").unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!((loaded.instance.nu(0).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn short_row_is_rejected() {
        let text = "N = 1\nM = 2\nnu = [[0.4, 0.4]]\nf = [[1, 0]]\n";
        assert!(matches!(parse_instance(text, "inline"), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_instance("N = 2\nM = 1\nnu = [[1.0]]\nf = [[1]]\n", "x.toml").unwrap_err();
        assert!(err.to_string().contains("`nu`"), "{err}");
        let err = parse_instance("N = 1\nM = 2\nnu = [[1.0, 0.0]]\nf = [[1, 2]]\n", "x.toml").unwrap_err();
        assert!(err.to_string().contains("column 1"), "{err}");
        let err = parse_instance("N = 1\nM = 1\nnu = [[1.0]]\nf = [[1]]\nbogus = 3\n", "x.toml").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_instance("N = 1\nM = 1\nnu = [[1.0]\nf = [[1]]\n", "x.toml").unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn alpha_is_read_and_checked() {
        let base = "N = 2\nM = 1\nnu = [[1.0], [1.0]]\nf = [[1], [0]]\n";
        let loaded = parse_instance(&format!("{base}alpha = [0.6, 0.8]\n"), "inline").unwrap();
        assert_eq!(loaded.alpha.unwrap()[1], Complex64::new(0.8, 0.0));
        assert!(parse_instance(&format!("{base}alpha = [0.6, 0.6]\n"), "inline").is_err());
        assert!(parse_instance(&format!("{base}alpha = [1.0]\n"), "inline").is_err());
    }

    #[test]
    fn written_instances_reload() {
        let inst = BanditInstance::from_arm_values(&[0.1, 0.7, 1.0 / 3.0]).unwrap();
        let alpha = crate::qbai::uniform_alpha(3);
        let text = write_instance(&inst, Some(&alpha)).unwrap();
        let loaded = parse_instance(&text, "roundtrip").unwrap();
        assert_eq!(loaded.instance, inst);
        assert_eq!(loaded.alpha.unwrap(), alpha);
    }
}
