//! File formats for graphs, projector frames and rationals.
//!
//! A graph is `{"vertices": [[coords], ...], "edges": [[tail, head, type], ...],
//! "boundary": "open"|"periodic"}`. A frame is `{"d", "r", "data"}` with the
//! `d² × r` basis stored column by column. Exact rationals inside reports
//! are `"numerator/denominator"` strings.

use std::path::Path;

use gapforge_core::lattice::{Boundary, Edge, Family, Graph};
use gapforge_core::sampler::ProjectorFrame;
use serde::{Deserialize, Serialize};

use crate::trial::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<Vec<i64>>,
    pub edges: Vec<[usize; 3]>,
    pub boundary: Boundary,
}

impl GraphFile {
    pub fn from_graph(g: &Graph) -> Self {
        GraphFile {
            vertices: g.coords().to_vec(),
            edges: g.edges().iter().map(|e| [e.tail, e.head, e.ty as usize]).collect(),
            boundary: g.boundary(),
        }
    }

    /// A custom-family graph; the degree bound is the observed maximum.
    pub fn to_graph(&self) -> gapforge_core::Result<Graph> {
        let edges = self
            .edges
            .iter()
            .map(|&[tail, head, ty]| {
                u32::try_from(ty)
                    .map(|ty| Edge { tail, head, ty })
                    .map_err(|_| gapforge_core::Error::InvalidParameter(format!("edge type {ty} out of range")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Graph::new(self.vertices.clone(), edges, self.boundary, Family::Custom, None, None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFile {
    pub d: usize,
    pub r: usize,
    pub data: Vec<f64>,
}

impl FrameFile {
    pub fn from_frame(f: &ProjectorFrame) -> Self {
        FrameFile { d: f.d(), r: f.rank(), data: f.columns().concat() }
    }

    pub fn to_frame(&self) -> gapforge_core::Result<ProjectorFrame> {
        let n = self.d * self.d;
        if self.data.len() != n * self.r {
            return Err(gapforge_core::Error::LengthMismatch { expected: n * self.r, got: self.data.len() });
        }
        ProjectorFrame::new(self.d, self.data.chunks(n.max(1)).take(self.r).map(<[f64]>::to_vec).collect())
    }
}

/// One frame per edge type, type `j` at position `j − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignmentFile {
    pub trial: usize,
    pub frames: Vec<FrameFile>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.into(), source })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gapforge_core::lattice::build_honeycomb;
    use gapforge_core::sampler::{sample_projector, RngStream};

    #[test]
    fn graph_and_frame_round_trip() {
        let g = build_honeycomb(2).unwrap();
        let file = GraphFile::from_graph(&g);
        let text = serde_json::to_string(&file).unwrap();
        assert!(text.starts_with(r#"{"vertices":"#));
        let back: GraphFile = serde_json::from_str(&text).unwrap();
        let h = back.to_graph().unwrap();
        assert_eq!(h.edges(), g.edges());
        assert_eq!(h.degree_bound(), 3);

        let f = sample_projector(3, 2, &mut RngStream::new(1, 0)).unwrap();
        let ff = FrameFile::from_frame(&f);
        assert_eq!(ff.data[..9], f.columns()[0][..]);
        assert_eq!(ff.to_frame().unwrap(), f);
    }
}
