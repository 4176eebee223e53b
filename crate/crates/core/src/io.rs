//! Plain-text formats for graphs, fields and decompositions.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.
//!
//! Graph document:
//!
//! ```text
//! rieszlab-graph 1
//! dim_hint 1
//! vertices 3
//! edges 2
//! embeddings 0
//! [vertices]
//! 0 1.0000000000000000e0
//! ...
//! [edges]
//! 0 1 1.0000000000000000e0 -
//! ...
//! [embeddings]
//! embedding 0 12
//! 0 5 1
//! 1 - 0
//! ...
//! ```
//!
//! An edge tag of `-` means untagged. An embedding line is
//! `component_vertex ambient_vertex isometric`, with `-` for removed vertices.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::glue::Embedding;
use crate::manifold::{Edge, WeightedGraphManifold};
use crate::spectral::SpectralDecomposition;

const GRAPH_MAGIC: &str = "rieszlab-graph 1";
const DECOMP_MAGIC: &str = "rieszlab-decomposition 1";

/// A graph with the embeddings of its glued components, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphDocument {
    pub graph: WeightedGraphManifold,
    pub embeddings: Vec<Embedding>,
}

pub fn write_graph(g: &WeightedGraphManifold, embeddings: &[Embedding]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{GRAPH_MAGIC}");
    let _ = writeln!(s, "dim_hint {}", g.dim_hint());
    let _ = writeln!(s, "vertices {}", g.len());
    let _ = writeln!(s, "edges {}", g.edges().len());
    let _ = writeln!(s, "embeddings {}", embeddings.len());
    s.push_str("[vertices]\n");
    for (v, m) in g.mu().iter().enumerate() {
        let _ = writeln!(s, "{v} {m:.16e}");
    }
    s.push_str("[edges]\n");
    for e in g.edges() {
        let _ = writeln!(s, "{} {} {:.16e} {}", e.a, e.b, e.w, e.tag.as_deref().unwrap_or("-"));
    }
    s.push_str("[embeddings]\n");
    for (i, emb) in embeddings.iter().enumerate() {
        let _ = writeln!(s, "embedding {i} {}", emb.component_len());
        for v in 0..emb.component_len() {
            match emb.get(v) {
                Some(a) => {
                    let _ = writeln!(s, "{v} {a} {}", u8::from(emb.is_isometric(v)));
                }
                None => {
                    let _ = writeln!(s, "{v} - 0");
                }
            }
        }
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            msg: msg.into(),
        })
    }

    fn next_line(&mut self) -> Result<&'a str> {
        loop {
            match self.inner.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    let l = l.trim();
                    if !l.is_empty() && !l.starts_with('#') {
                        return Ok(l);
                    }
                }
                None => return self.err("unexpected end of input"),
            }
        }
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != literal {
            return self.err(format!("expected {literal:?}, found {l:?}"));
        }
        Ok(())
    }

    fn keyed(&mut self, key: &str) -> Result<usize> {
        let l = self.next_line()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => self.num(v.trim()),
            _ => self.err(format!("expected `{key} <count>`, found {l:?}")),
        }
    }

    fn fields(&mut self, n: usize) -> Result<Vec<&'a str>> {
        let l = self.next_line()?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != n {
            return self.err(format!("expected {n} fields, found {}", parts.len()));
        }
        Ok(parts)
    }

    fn num<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse().or_else(|_| self.err(format!("cannot parse {s:?}")))
    }

    fn finish(&mut self) -> Result<()> {
        if let Ok(l) = self.next_line() {
            return self.err(format!("trailing content {l:?}"));
        }
        Ok(())
    }
}

pub fn read_graph(text: &str) -> Result<GraphDocument> {
    let mut r = Lines::new(text);
    r.expect(GRAPH_MAGIC)?;
    let dim = r.keyed("dim_hint")?;
    let nv = r.keyed("vertices")?;
    let ne = r.keyed("edges")?;
    let nemb = r.keyed("embeddings")?;
    r.expect("[vertices]")?;
    let mut mu = Vec::with_capacity(nv);
    for i in 0..nv {
        let f = r.fields(2)?;
        if r.num::<usize>(f[0])? != i {
            return r.err(format!("vertex ids must be 0..{nv} in order"));
        }
        mu.push(r.num(f[1])?);
    }
    r.expect("[edges]")?;
    let mut edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let f = r.fields(4)?;
        let (a, b, w) = (r.num(f[0])?, r.num(f[1])?, r.num(f[2])?);
        edges.push(if f[3] == "-" {
            Edge::new(a, b, w)
        } else {
            Edge::tagged(a, b, w, f[3])
        });
    }
    r.expect("[embeddings]")?;
    let mut embeddings = Vec::with_capacity(nemb);
    for i in 0..nemb {
        let f = r.fields(3)?;
        if f[0] != "embedding" || r.num::<usize>(f[1])? != i {
            return r.err(format!("expected `embedding {i} <length>`"));
        }
        let len: usize = r.num(f[2])?;
        let mut map = Vec::with_capacity(len);
        let mut iso = Vec::with_capacity(len);
        for v in 0..len {
            let f = r.fields(3)?;
            if r.num::<usize>(f[0])? != v {
                return r.err("embedding vertices must be listed in order");
            }
            let target: Option<usize> = if f[1] == "-" { None } else { Some(r.num(f[1])?) };
            if target.is_some_and(|a| a >= nv) {
                return r.err("embedding target out of range");
            }
            map.push(target);
            iso.push(match f[2] {
                "0" => false,
                "1" => true,
                other => return r.err(format!("isometry flag must be 0 or 1, found {other:?}")),
            });
        }
        embeddings.push(Embedding::from_parts(map, iso)?);
    }
    r.finish()?;
    let graph = WeightedGraphManifold::new(mu, edges, dim)?;
    Ok(GraphDocument { graph, embeddings })
}

/// `vertex_id value` lines.
pub fn write_field(values: &[f64]) -> String {
    let mut s = String::new();
    for (v, x) in values.iter().enumerate() {
        let _ = writeln!(s, "{v} {x:.16e}");
    }
    s
}

pub fn read_field(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let (id, x) = l.split_once(' ').ok_or_else(|| err(format!("expected `id value`, found {l:?}")))?;
        let id: usize = id.parse().map_err(|_| err(format!("bad vertex id {id:?}")))?;
        if id != out.len() {
            return Err(err("vertex ids must be 0.. in order".into()));
        }
        out.push(x.trim().parse().map_err(|_| err(format!("bad value {x:?}")))?);
    }
    Ok(out)
}

/// Volumes, eigenvalues, then the eigenvector matrix row by row.
pub fn write_decomposition(d: &SpectralDecomposition) -> String {
    let n = d.len();
    let mut s = String::new();
    let _ = writeln!(s, "{DECOMP_MAGIC}");
    let _ = writeln!(s, "size {n}");
    let row = |s: &mut String, xs: &mut dyn Iterator<Item = f64>| {
        let line: Vec<String> = xs.map(|x| format!("{x:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    };
    s.push_str("[mu]\n");
    row(&mut s, &mut d.mu().iter().copied());
    s.push_str("[eigenvalues]\n");
    row(&mut s, &mut d.eigenvalues().iter().copied());
    s.push_str("[vectors]\n");
    for i in 0..n {
        row(&mut s, &mut d.vectors().row(i).iter().copied());
    }
    s
}

pub fn read_decomposition(text: &str) -> Result<SpectralDecomposition> {
    let mut r = Lines::new(text);
    r.expect(DECOMP_MAGIC)?;
    let n = r.keyed("size")?;
    let row = |r: &mut Lines<'_>| -> Result<Vec<f64>> {
        let f = r.fields(n)?;
        f.iter().map(|x| r.num(x)).collect()
    };
    r.expect("[mu]")?;
    let mu = row(&mut r)?;
    r.expect("[eigenvalues]")?;
    let eig = row(&mut r)?;
    r.expect("[vectors]")?;
    let mut data = Vec::with_capacity(n * n);
    for _ in 0..n {
        data.extend(row(&mut r)?);
    }
    r.finish()?;
    SpectralDecomposition::from_parts(mu, eig, DMatrix::from_row_slice(n, n, &data))
}
