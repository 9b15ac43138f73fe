//! Plain-text key/value scene configuration files.
//!
//! Format: one `key = value` pair per line, `#` comments, whitespace-
//! separated numeric lists. Example:
//!
//! ```text
//! scene_id = offcenter-2d
//! dimension = 2
//! outer_center = 0.3 0.0
//! outer_radius = 1.3
//! hole = ball              # ball | fourier | zonal
//! # hole_cos = 1.0 0.0 0.05   (fourier: a_0 a_1 ...)
//! # hole_sin = 0.1            (fourier: b_1 b_2 ...)
//! # hole_zonal = 1.0 0.0 0.1  (zonal Legendre coefficients c_0 c_1 ...)
//! epsilons = 0.2 0.1 0.05 0.025
//! pairs = 200
//! seed = 7
//! ```

use crate::geometry::{HoleShape, PerforationConfig, Point};
use crate::{Error, Result};
use std::collections::HashMap;
use std::path::Path;

/// A parsed scene file: the geometry template plus sweep defaults.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub scene_id: String,
    pub n: usize,
    pub outer_center: Point,
    pub outer_radius: f64,
    pub hole: HoleShape,
    pub epsilons: Vec<f64>,
    pub pairs: usize,
    pub seed: u64,
}

impl SceneSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_content(&text)
    }

    pub fn from_str_content(text: &str) -> Result<Self> {
        let mut kv: HashMap<String, String> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> {
            kv.get(k).ok_or_else(|| Error::Config(format!("missing key '{k}'")))
        };
        let floats = |s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number '{t}'")))
                })
                .collect()
        };
        let n: usize = get("dimension")?
            .parse()
            .map_err(|_| Error::Config("bad dimension".into()))?;
        let center = Point::from_slice(&floats(get("outer_center")?)?)?;
        let radius: f64 = get("outer_radius")?
            .parse()
            .map_err(|_| Error::Config("bad outer_radius".into()))?;
        let hole = match get("hole")?.as_str() {
            "ball" => HoleShape::Ball,
            "fourier" => HoleShape::Fourier {
                cos: floats(get("hole_cos")?)?,
                sin: kv.get("hole_sin").map(|s| floats(s)).transpose()?.unwrap_or_default(),
            },
            "zonal" => HoleShape::Zonal { coeffs: floats(get("hole_zonal")?)? },
            other => return Err(Error::Config(format!("unknown hole kind '{other}'"))),
        };
        let epsilons = floats(get("epsilons")?)?;
        if epsilons.is_empty() {
            return Err(Error::Config("epsilons list is empty".into()));
        }
        let pairs = kv
            .get("pairs")
            .map(|s| s.parse::<usize>().map_err(|_| Error::Config("bad pairs".into())))
            .transpose()?
            .unwrap_or(200);
        let seed = kv
            .get("seed")
            .map(|s| s.parse::<u64>().map_err(|_| Error::Config("bad seed".into())))
            .transpose()?
            .unwrap_or(7);
        let scene_id = kv
            .get("scene_id")
            .cloned()
            .unwrap_or_else(|| format!("scene-{n}d"));
        Ok(SceneSpec {
            scene_id,
            n,
            outer_center: center,
            outer_radius: radius,
            hole,
            epsilons,
            pairs,
            seed,
        })
    }

    /// Normalized geometry at the given hole scale.
    pub fn config_at(&self, eps: f64) -> Result<PerforationConfig> {
        PerforationConfig::new(self.n, self.outer_center, self.outer_radius, self.hole.clone(), eps)?
            .normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_ball_scene() {
        let spec = SceneSpec::from_str_content(
            "scene_id = t\ndimension = 3\nouter_center = 0 0 0\nouter_radius = 1.0\n\
             hole = ball\nepsilons = 0.2 0.1\n",
        )
        .unwrap();
        assert_eq!(spec.n, 3);
        assert_eq!(spec.epsilons, vec![0.2, 0.1]);
        assert_eq!(spec.pairs, 200);
        let cfg = spec.config_at(0.1).unwrap();
        assert_eq!(cfg.epsilon(), 0.1);
    }

    #[test]
    fn parses_fourier_hole_with_comments() {
        let spec = SceneSpec::from_str_content(
            "# a planar scene\ndimension = 2\nouter_center = 0.3 0.0  # off-center\n\
             outer_radius = 1.3\nhole = fourier\nhole_cos = 1.0 0.2\nhole_sin = 0.1\n\
             epsilons = 0.05\nseed = 11\npairs = 20\n",
        )
        .unwrap();
        assert_eq!(spec.seed, 11);
        match spec.hole {
            HoleShape::Fourier { ref cos, ref sin } => {
                assert_eq!(cos, &vec![1.0, 0.2]);
                assert_eq!(sin, &vec![0.1]);
            }
            _ => panic!("wrong hole kind"),
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(SceneSpec::from_str_content("dimension 3").is_err());
        assert!(SceneSpec::from_str_content("dimension = 3\n").is_err());
        let bad_hole = "dimension = 2\nouter_center = 0 0\nouter_radius = 1\n\
                        hole = pentagon\nepsilons = 0.1\n";
        assert!(SceneSpec::from_str_content(bad_hole).is_err());
    }
}
