//! Surgery: cylinders glued onto a torus-cylinder backbone.
//!
//! Each piece `M_n × ℝ` loses one vertex `B_n` and the backbone loses one
//! vertex `B'_n`; the former neighbor sets are joined by bridging edges.
//! Every surviving piece vertex embeds into the ambient graph, and vertices at
//! axis distance at least `cut_offset` from the glue level are flagged
//! isometric (their generator is untouched by the surgery).

use serde::{Deserialize, Serialize};

use crate::cylinder::CylinderGraph;
use crate::error::{invalid, Error, Result};
use crate::field::{check_len, ScalarField};
use crate::manifold::{is_connected, Edge, WeightedGraphManifold};

pub const BRIDGE_TAG: &str = "bridge";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BridgePolicy {
    /// Every former neighbor of `B_n` joined to every former neighbor of `B'_n`.
    #[default]
    CompleteBipartite,
    /// Neighbors paired in index order; both neighbor sets must have equal size.
    Matching,
}

/// Vertices removed from a piece (`piece_vertex`) and from the backbone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlueSite {
    pub piece_vertex: usize,
    pub backbone_vertex: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlueOptions {
    pub bridge_policy: BridgePolicy,
    /// Axis steps between the glue level and the isometric region.
    pub cut_offset: usize,
}

impl Default for GlueOptions {
    fn default() -> Self {
        GlueOptions {
            bridge_policy: BridgePolicy::CompleteBipartite,
            cut_offset: 2,
        }
    }
}

/// Injective map from a component's surviving vertices into the ambient graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    map: Vec<Option<usize>>,
    isometric: Vec<bool>,
}

impl Embedding {
    pub fn from_parts(map: Vec<Option<usize>>, isometric: Vec<bool>) -> Result<Self> {
        if map.len() != isometric.len() {
            return invalid("embedding map and isometry flags differ in length");
        }
        if map.iter().zip(&isometric).any(|(m, iso)| m.is_none() && *iso) {
            return invalid("a vertex outside the domain cannot be isometric");
        }
        Ok(Embedding { map, isometric })
    }

    /// Ambient image of a component vertex, if it survived the surgery.
    pub fn get(&self, v: usize) -> Option<usize> {
        self.map[v]
    }

    pub fn is_isometric(&self, v: usize) -> bool {
        self.isometric[v]
    }

    pub fn component_len(&self) -> usize {
        self.map.len()
    }

    pub fn domain_len(&self) -> usize {
        self.map.iter().filter(|m| m.is_some()).count()
    }

    /// `(component vertex, ambient vertex, isometric)` over the domain.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        self.map
            .iter()
            .enumerate()
            .filter_map(move |(v, m)| m.map(|a| (v, a, self.isometric[v])))
    }

    /// Component vertices outside the isometric region (including removed ones).
    pub fn non_isometric(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&v| !self.isometric[v]).collect()
    }
}

/// What the surgery did at one junction.
#[derive(Clone, Debug, PartialEq)]
pub struct GlueRecord {
    pub removed_piece_vertex: usize,
    pub removed_backbone_vertex: usize,
    /// Former neighbors of the removed piece vertex (piece indices).
    pub piece_boundary: Vec<usize>,
    /// Former neighbors of the removed backbone vertex (backbone indices).
    pub backbone_boundary: Vec<usize>,
    /// Bridging edges in ambient indices.
    pub bridges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Backbone,
    Piece(usize),
}

#[derive(Clone, Debug)]
pub struct GluedManifold {
    ambient: WeightedGraphManifold,
    backbone: CylinderGraph,
    backbone_embedding: Embedding,
    pieces: Vec<CylinderGraph>,
    embeddings: Vec<Embedding>,
    records: Vec<GlueRecord>,
    cut_offset: usize,
}

impl GluedManifold {
    pub fn ambient(&self) -> &WeightedGraphManifold {
        &self.ambient
    }

    pub fn backbone(&self) -> &CylinderGraph {
        &self.backbone
    }

    pub fn pieces(&self) -> &[CylinderGraph] {
        &self.pieces
    }

    pub fn records(&self) -> &[GlueRecord] {
        &self.records
    }

    pub fn cut_offset(&self) -> usize {
        self.cut_offset
    }

    pub fn embeddings(&self) -> &[Embedding] {
        &self.embeddings
    }

    pub fn component(&self, c: Component) -> Result<(&CylinderGraph, &Embedding)> {
        match c {
            Component::Backbone => Ok((&self.backbone, &self.backbone_embedding)),
            Component::Piece(n) => match (self.pieces.get(n), self.embeddings.get(n)) {
                (Some(p), Some(e)) => Ok((p, e)),
                _ => invalid(format!("no piece with index {n}")),
            },
        }
    }

    /// Extension by zero: `i_* F` agrees with `F` through the embedding.
    pub fn pushforward(&self, c: Component, field: &ScalarField) -> Result<ScalarField> {
        let (cyl, emb) = self.component(c)?;
        check_len(cyl.len(), field.len())?;
        let mut out = vec![0.0; self.ambient.len()];
        for (v, &x) in field.values().iter().enumerate() {
            match emb.get(v) {
                Some(a) => out[a] = x,
                None if x != 0.0 => {
                    return invalid(format!(
                        "field is nonzero at vertex {v}, which is outside the embedding domain"
                    ))
                }
                None => {}
            }
        }
        Ok(ScalarField::new(out))
    }

    /// Composition with the embedding: `(i^* f)(v) = f(i(v))`, zero off the domain.
    pub fn pullback(&self, c: Component, field: &ScalarField) -> Result<ScalarField> {
        let (cyl, emb) = self.component(c)?;
        check_len(self.ambient.len(), field.len())?;
        let f = field.values();
        let values = (0..cyl.len())
            .map(|v| emb.get(v).map_or(0.0, |a| f[a]))
            .collect();
        Ok(ScalarField::new(values))
    }
}

/// Piece sites in the middle of each axis at base vertex 0; backbone sites
/// spread over the backbone base at its middle level.
pub fn default_sites(pieces: &[CylinderGraph], backbone: &CylinderGraph) -> Vec<GlueSite> {
    let k = pieces.len().max(1);
    let bb_level = backbone.axis_steps() / 2;
    pieces
        .iter()
        .enumerate()
        .map(|(i, p)| GlueSite {
            piece_vertex: p.vertex(0, p.axis_steps() / 2),
            backbone_vertex: backbone.vertex(i * backbone.base_len() / k, bb_level),
        })
        .collect()
}

fn in_middle_band(cyl: &CylinderGraph, level: usize) -> bool {
    let n = cyl.axis_steps();
    level >= n / 4 && level + n / 4 < n
}

/// Glues each piece onto the backbone at the given sites.
pub fn glue(
    pieces: Vec<CylinderGraph>,
    backbone: CylinderGraph,
    sites: &[GlueSite],
    opts: GlueOptions,
) -> Result<GluedManifold> {
    if sites.len() != pieces.len() {
        return invalid(format!("{} pieces but {} glue sites", pieces.len(), sites.len()));
    }
    if opts.cut_offset < 2 {
        return invalid("cut offset must be at least 2 axis steps");
    }
    let bb = backbone.graph();
    for (i, (p, s)) in pieces.iter().zip(sites).enumerate() {
        if p.graph().dim_hint() != bb.dim_hint() {
            return invalid(format!(
                "piece {i} has dimension {} but the backbone has {}",
                p.graph().dim_hint(),
                bb.dim_hint()
            ));
        }
        if s.piece_vertex >= p.len() || s.backbone_vertex >= backbone.len() {
            return invalid(format!("glue site {i} references a missing vertex"));
        }
        if !in_middle_band(p, p.level(s.piece_vertex)) {
            return invalid(format!("piece {i} glue site is outside the middle axis band"));
        }
    }
    // closed neighborhoods of backbone sites must be disjoint
    let bb_sites: Vec<usize> = sites.iter().map(|s| s.backbone_vertex).collect();
    for (i, &s) in bb_sites.iter().enumerate() {
        let dist = bb.distances_from(&[s]);
        for &t in &bb_sites[i + 1..] {
            if dist[t] < 3 {
                return invalid(format!(
                    "backbone sites {s} and {t} overlap (distance {})",
                    dist[t]
                ));
            }
        }
    }

    let mut mu = Vec::new();
    let mut edges = Vec::new();

    let bb_removed: Vec<bool> = (0..backbone.len()).map(|v| bb_sites.contains(&v)).collect();
    let bb_site_levels: Vec<usize> = bb_sites.iter().map(|&s| backbone.level(s)).collect();
    let (bb_map, bb_iso) = place_component(&backbone, &bb_removed, &bb_site_levels, opts.cut_offset, &mut mu);
    copy_edges(bb, &bb_map, &mut edges);
    let backbone_embedding = Embedding::from_parts(bb_map, bb_iso)?;

    let mut embeddings = Vec::with_capacity(pieces.len());
    let mut records = Vec::with_capacity(pieces.len());
    for (p, site) in pieces.iter().zip(sites) {
        let removed: Vec<bool> = (0..p.len()).map(|v| v == site.piece_vertex).collect();
        let (map, iso) = place_component(p, &removed, &[p.level(site.piece_vertex)], opts.cut_offset, &mut mu);
        copy_edges(p.graph(), &map, &mut edges);

        let star_p: Vec<(usize, f64)> = p
            .graph()
            .neighbors(site.piece_vertex)
            .iter()
            .map(|&(u, e)| (u, p.graph().edges()[e].w))
            .collect();
        let star_b: Vec<(usize, f64)> = bb
            .neighbors(site.backbone_vertex)
            .iter()
            .map(|&(u, e)| (u, bb.edges()[e].w))
            .collect();
        let bridges = bridge_edges(&star_p, &star_b, &map, &backbone_embedding.map, opts.bridge_policy)?;
        edges.extend(bridges.iter().cloned());

        records.push(GlueRecord {
            removed_piece_vertex: site.piece_vertex,
            removed_backbone_vertex: site.backbone_vertex,
            piece_boundary: star_p.iter().map(|&(u, _)| u).collect(),
            backbone_boundary: star_b.iter().map(|&(u, _)| u).collect(),
            bridges,
        });
        embeddings.push(Embedding::from_parts(map, iso)?);
    }

    if !is_connected(mu.len(), &edges) {
        return Err(Error::SurgeryFailure(
            "ambient graph is disconnected after removing the glue sites".into(),
        ));
    }
    let ambient = WeightedGraphManifold::new(mu, edges, bb.dim_hint())?;
    Ok(GluedManifold {
        ambient,
        backbone,
        backbone_embedding,
        pieces,
        embeddings,
        records,
        cut_offset: opts.cut_offset,
    })
}

/// Appends surviving vertices of a component to the ambient volume list and
/// returns the vertex map with isometry flags.
fn place_component(
    cyl: &CylinderGraph,
    removed: &[bool],
    site_levels: &[usize],
    cut_offset: usize,
    mu: &mut Vec<f64>,
) -> (Vec<Option<usize>>, Vec<bool>) {
    let mut map = Vec::with_capacity(cyl.len());
    let mut iso = Vec::with_capacity(cyl.len());
    for v in 0..cyl.len() {
        if removed[v] {
            map.push(None);
            iso.push(false);
            continue;
        }
        map.push(Some(mu.len()));
        mu.push(cyl.graph().mu()[v]);
        let level = cyl.level(v);
        iso.push(site_levels.iter().all(|&l| cyl.axis_distance(level, l) >= cut_offset));
    }
    (map, iso)
}

fn copy_edges(g: &WeightedGraphManifold, map: &[Option<usize>], out: &mut Vec<Edge>) {
    for e in g.edges() {
        if let (Some(a), Some(b)) = (map[e.a], map[e.b]) {
            out.push(Edge {
                a,
                b,
                w: e.w,
                tag: e.tag.clone(),
            });
        }
    }
}

/// Bridging edges whose total conductance is the mean of the two removed stars.
fn bridge_edges(
    star_p: &[(usize, f64)],
    star_b: &[(usize, f64)],
    piece_map: &[Option<usize>],
    bb_map: &[Option<usize>],
    policy: BridgePolicy,
) -> Result<Vec<Edge>> {
    let wp: f64 = star_p.iter().map(|s| s.1).sum();
    let wb: f64 = star_b.iter().map(|s| s.1).sum();
    let total = 0.5 * (wp + wb);
    let amb = |map: &[Option<usize>], v: usize| {
        map[v].ok_or_else(|| Error::SurgeryFailure(format!("glue neighbor {v} was removed")))
    };
    let mut out = Vec::new();
    match policy {
        BridgePolicy::CompleteBipartite => {
            for &(u, w1) in star_p {
                for &(v, w2) in star_b {
                    out.push(Edge::tagged(
                        amb(piece_map, u)?,
                        amb(bb_map, v)?,
                        total * (w1 / wp) * (w2 / wb),
                        BRIDGE_TAG,
                    ));
                }
            }
        }
        BridgePolicy::Matching => {
            if star_p.len() != star_b.len() {
                return invalid(format!(
                    "matching bridges need equal neighbor counts, got {} and {}",
                    star_p.len(),
                    star_b.len()
                ));
            }
            let mut sp = star_p.to_vec();
            let mut sb = star_b.to_vec();
            sp.sort_by_key(|s| s.0);
            sb.sort_by_key(|s| s.0);
            for (&(u, w1), &(v, w2)) in sp.iter().zip(&sb) {
                out.push(Edge::tagged(
                    amb(piece_map, u)?,
                    amb(bb_map, v)?,
                    total * 0.5 * (w1 / wp + w2 / wb),
                    BRIDGE_TAG,
                ));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylinder::{build_cylinder, AxisBoundary};
    use crate::manifold::build_cycle;

    fn pilot(pieces: usize) -> GluedManifold {
        let c = build_cycle(8, 8.0).unwrap();
        let bb = build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap();
        let ps: Vec<_> = (0..pieces)
            .map(|_| build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap())
            .collect();
        let sites = default_sites(&ps, &bb);
        glue(ps, bb, &sites, GlueOptions::default()).unwrap()
    }

    #[test]
    fn one_piece_vertex_count_and_conductance_budget() {
        let g = pilot(1);
        assert_eq!(g.ambient().len(), 96 + 96 - 2);
        let rec = &g.records()[0];
        let bridged: f64 = rec.bridges.iter().map(|e| e.w).sum();
        // both removed stars have total conductance 4
        assert!((bridged - 4.0).abs() < 1e-12);
        assert_eq!(rec.bridges.len(), 16);
    }

    #[test]
    fn embeddings_are_disjoint_and_measure_preserving() {
        let g = pilot(2);
        let mut seen = vec![false; g.ambient().len()];
        for c in [Component::Backbone, Component::Piece(0), Component::Piece(1)] {
            let (cyl, emb) = g.component(c).unwrap();
            for (v, a, _) in emb.iter() {
                assert!(!seen[a]);
                seen[a] = true;
                assert_eq!(cyl.graph().mu()[v], g.ambient().mu()[a]);
            }
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn overlapping_backbone_sites_rejected() {
        let c = build_cycle(8, 8.0).unwrap();
        let bb = build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap();
        let ps: Vec<_> = (0..2)
            .map(|_| build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap())
            .collect();
        let sites = vec![
            GlueSite { piece_vertex: ps[0].vertex(0, 6), backbone_vertex: bb.vertex(0, 6) },
            GlueSite { piece_vertex: ps[1].vertex(0, 6), backbone_vertex: bb.vertex(2, 6) },
        ];
        assert!(matches!(
            glue(ps, bb, &sites, GlueOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn piece_site_outside_middle_band_rejected() {
        let c = build_cycle(8, 8.0).unwrap();
        let bb = build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap();
        let p = build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap();
        let sites = vec![GlueSite { piece_vertex: p.vertex(0, 0), backbone_vertex: bb.vertex(0, 6) }];
        assert!(glue(vec![p], bb, &sites, GlueOptions::default()).is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let c = build_cycle(8, 8.0).unwrap();
        let torus = crate::manifold::build_torus(2, 4, 4.0).unwrap();
        let bb = build_cylinder(&torus, 8, 1.0, AxisBoundary::Periodic).unwrap();
        let piece = build_cylinder(&c, 8, 1.0, AxisBoundary::Periodic).unwrap();
        let sites = default_sites(std::slice::from_ref(&piece), &bb);
        assert!(glue(vec![piece], bb, &sites, GlueOptions::default()).is_err());
    }

    #[test]
    fn matching_policy_budget() {
        let c = build_cycle(8, 8.0).unwrap();
        let bb = build_cylinder(&c, 12, 1.0, AxisBoundary::Periodic).unwrap();
        let p = build_cylinder(&c, 12, 0.5, AxisBoundary::Periodic).unwrap();
        let sites = default_sites(std::slice::from_ref(&p), &bb);
        let opts = GlueOptions { bridge_policy: BridgePolicy::Matching, ..Default::default() };
        let g = glue(vec![p.clone()], bb, &sites, opts).unwrap();
        let rec = &g.records()[0];
        assert_eq!(rec.bridges.len(), 4);
        let star_p: f64 = p.graph().neighbors(rec.removed_piece_vertex).iter().map(|&(_, e)| p.graph().edges()[e].w).sum();
        let bridged: f64 = rec.bridges.iter().map(|e| e.w).sum();
        assert!((bridged - 0.5 * (star_p + 4.0)).abs() < 1e-12);
    }

    #[test]
    fn push_pull_round_trip() {
        let g = pilot(2);
        let (cyl, emb) = g.component(Component::Piece(1)).unwrap();
        let vals: Vec<f64> = (0..cyl.len())
            .map(|v| if emb.is_isometric(v) { (v as f64).sin() } else { 0.0 })
            .collect();
        let f = ScalarField::new(vals);
        let pushed = g.pushforward(Component::Piece(1), &f).unwrap();
        assert_eq!(g.pullback(Component::Piece(1), &pushed).unwrap(), f);
        let zero = g.pushforward(Component::Piece(1), &ScalarField::new(vec![0.0; cyl.len()])).unwrap();
        assert!(zero.values().iter().all(|x| *x == 0.0));
        let mut bad = vec![0.0; cyl.len()];
        bad[g.records()[1].removed_piece_vertex] = 1.0;
        assert!(g.pushforward(Component::Piece(1), &ScalarField::new(bad)).is_err());
    }
}
