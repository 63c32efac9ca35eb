use super::{Point, Polytope};
use crate::error::{Error, Result};
use crate::scalar::{format_scalar, parse_scalar};
use serde::{Deserialize, Serialize};

/// JSON body document: `{"dim": d, "vertices": [["p/q", ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyJson {
    pub dim: usize,
    pub vertices: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<bool>,
}

impl BodyJson {
    /// Parses, canonicalizes and checks the optional symmetry assertion.
    pub fn to_polytope(&self) -> Result<Polytope> {
        let mut pts = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
            }
            pts.push(Point(v.iter().map(|s| parse_scalar(s)).collect::<Result<_>>()?));
        }
        let p = Polytope::from_points(self.dim, &pts)?;
        if self.symmetric == Some(true) && !p.is_centrally_symmetric() {
            return Err(Error::NotSymmetric("body declared symmetric has no center of symmetry".into()));
        }
        Ok(p)
    }

    pub fn from_polytope(p: &Polytope) -> Self {
        BodyJson {
            dim: p.dim(),
            vertices: p.vertices().iter().map(|v| v.coords().iter().map(format_scalar).collect()).collect(),
            symmetric: None,
        }
    }

    pub fn parse_str(text: &str) -> Result<Polytope> {
        let doc: BodyJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        doc.to_polytope()
    }
}
