//! Oriented tetrahedral complexes with boundary and a marked patch.

mod gamma;
mod generators;
mod io;

use std::collections::{HashMap, VecDeque};

use dirac_boundary::{BoundaryPatch, SignedIncidence, SurfaceCounts};

use crate::CoreError;

pub use gamma::{select_gamma, GammaSelector};
pub use generators::{
    build_ball, build_single_tet, build_solid_torus, build_solid_torus_with, build_tunneled_box, build_tunneled_box_with,
    refine, TunnelStyle, SIMPLEX_BUDGET,
};
pub use io::{load_complex, save_complex, MeshFile};

/// Parity of the permutation that sorts `seq` (distinct entries).
pub fn perm_sign(seq: &[usize]) -> i8 {
    let mut s = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            }
        }
    }
    s
}

pub fn tet_volume(x: &[[f64; 3]], t: &[usize; 4]) -> f64 {
    let [a, b, c, d] = t.map(|i| x[i]);
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [d[0] - a[0], d[1] - a[1], d[2] - a[2]];
    (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])) / 6.0
}

fn sorted<const N: usize>(mut a: [usize; N]) -> [usize; N] {
    a.sort_unstable();
    a
}

/// Face of `t` opposite local vertex `i`, in the order inherited from `t`.
fn tet_face(t: &[usize; 4], i: usize) -> [usize; 3] {
    let mut f = [0; 3];
    let mut m = 0;
    for (j, &v) in t.iter().enumerate() {
        if j != i {
            f[m] = v;
            m += 1;
        }
    }
    f
}

/// The discrete (M, dM, Gamma).
///
/// Edges and triangles are oriented by increasing vertex index; tetrahedra by
/// positive volume in their stored vertex order.  Immutable once built.
#[derive(Clone, Debug)]
pub struct SimplicialComplex3 {
    vertices: Vec<[f64; 3]>,
    tets: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    edge_index: HashMap<[usize; 2], usize>,
    face_index: HashMap<[usize; 3], usize>,
    face_tets: Vec<Vec<usize>>,
    boundary_faces: Vec<usize>,
    on_boundary: [Vec<bool>; 4],
    gamma: Vec<usize>,
}

impl PartialEq for SimplicialComplex3 {
    fn eq(&self, other: &Self) -> bool {
        let key = |c: &SimplicialComplex3| {
            let mut t: Vec<[usize; 4]> = c.tets.clone();
            t.sort_unstable();
            let mut g: Vec<[usize; 3]> = c.gamma.iter().map(|&f| c.faces[f]).collect();
            g.sort_unstable();
            (t, g)
        };
        self.vertices == other.vertices && key(self) == key(other)
    }
}

impl SimplicialComplex3 {
    /// Validates and builds the complex.  Tetrahedra must be consistently
    /// oriented (combinatorially); a globally negative orientation is flipped.
    /// Gamma defaults to the whole boundary.
    pub fn new(vertices: Vec<[f64; 3]>, mut tets: Vec<[usize; 4]>) -> Result<Self, CoreError> {
        let nv = vertices.len();
        if tets.is_empty() {
            return Err(CoreError::Malformed("no tetrahedra".into()));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(CoreError::Malformed("non-finite vertex coordinate".into()));
        }
        let mut used = vec![false; nv];
        for (ti, t) in tets.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(CoreError::Malformed(format!("tet {ti} references a missing vertex")));
            }
            let s = sorted(*t);
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(CoreError::Malformed(format!("tet {ti} repeats a vertex")));
            }
            t.iter().for_each(|&v| used[v] = true);
        }
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(CoreError::Malformed(format!("vertex {v} belongs to no tetrahedron")));
        }

        // face incidence with induced orientation signs
        let mut face_index: HashMap<[usize; 3], usize> = HashMap::new();
        let mut faces: Vec<[usize; 3]> = Vec::new();
        let mut incid: Vec<Vec<(usize, i8)>> = Vec::new();
        for (ti, t) in tets.iter().enumerate() {
            for i in 0..4 {
                let f = tet_face(t, i);
                let sign = if i % 2 == 0 { 1 } else { -1 } * perm_sign(&f);
                let key = sorted(f);
                let id = *face_index.entry(key).or_insert_with(|| {
                    faces.push(key);
                    incid.push(Vec::new());
                    faces.len() - 1
                });
                incid[id].push((ti, sign));
            }
        }
        let bad: Vec<[usize; 3]> = incid.iter().zip(&faces).filter(|(i, _)| i.len() > 2).map(|(_, f)| *f).collect();
        if !bad.is_empty() {
            return Err(CoreError::NonManifold { faces: bad });
        }
        for (inc, f) in incid.iter().zip(&faces) {
            if inc.len() == 2 && inc[0].1 == inc[1].1 {
                return Err(CoreError::Orientation { face: *f });
            }
        }

        // connectivity through shared faces
        let mut nbr: Vec<Vec<usize>> = vec![Vec::new(); tets.len()];
        for inc in &incid {
            if inc.len() == 2 {
                nbr[inc[0].0].push(inc[1].0);
                nbr[inc[1].0].push(inc[0].0);
            }
        }
        let mut comp = vec![usize::MAX; tets.len()];
        let mut ncomp = 0;
        for s in 0..tets.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut q = VecDeque::from([s]);
            comp[s] = ncomp;
            while let Some(t) = q.pop_front() {
                for &u in &nbr[t] {
                    if comp[u] == usize::MAX {
                        comp[u] = ncomp;
                        q.push_back(u);
                    }
                }
            }
            ncomp += 1;
        }
        if ncomp > 1 {
            return Err(CoreError::Disconnected { components: ncomp });
        }

        // geometric orientation: all volumes share one sign after the combinatorial check
        let diam = diameter(&vertices);
        let vols: Vec<f64> = tets.iter().map(|t| tet_volume(&vertices, t)).collect();
        for (ti, &v) in vols.iter().enumerate() {
            if v.abs() < 1e-12 * diam.powi(3) {
                return Err(CoreError::Degenerate { tet: ti, volume: v });
            }
        }
        let npos = vols.iter().filter(|&&v| v > 0.0).count();
        if npos != 0 && npos != vols.len() {
            let ti = vols.iter().position(|&v| (v > 0.0) != (npos * 2 > vols.len())).unwrap();
            return Err(CoreError::Geometry(format!("tet {ti} is inverted relative to its neighbours")));
        }
        if npos == 0 {
            for t in &mut tets {
                t.swap(0, 1);
            }
        }

        let mut edge_index = HashMap::new();
        let mut edges = Vec::new();
        let mut sorted_faces = faces.clone();
        sorted_faces.sort_unstable();
        for f in &sorted_faces {
            for e in [[f[0], f[1]], [f[0], f[2]], [f[1], f[2]]] {
                edge_index.entry(e).or_insert_with(|| {
                    edges.push(e);
                    0
                });
            }
        }
        edges.sort_unstable();
        for (i, e) in edges.iter().enumerate() {
            edge_index.insert(*e, i);
        }
        let face_index: HashMap<[usize; 3], usize> = sorted_faces.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        let mut face_tets = vec![Vec::new(); sorted_faces.len()];
        for (ti, t) in tets.iter().enumerate() {
            for i in 0..4 {
                face_tets[face_index[&sorted(tet_face(t, i))]].push(ti);
            }
        }
        let boundary_faces: Vec<usize> = (0..sorted_faces.len()).filter(|&f| face_tets[f].len() == 1).collect();
        if boundary_faces.is_empty() {
            return Err(CoreError::EmptyBoundary);
        }
        let mut on_boundary = [vec![false; nv], vec![false; edges.len()], vec![false; sorted_faces.len()], vec![false; tets.len()]];
        for &f in &boundary_faces {
            let [a, b, c] = sorted_faces[f];
            on_boundary[2][f] = true;
            for v in [a, b, c] {
                on_boundary[0][v] = true;
            }
            for e in [[a, b], [a, c], [b, c]] {
                on_boundary[1][edge_index[&e]] = true;
            }
        }
        let gamma = boundary_faces.clone();
        Ok(SimplicialComplex3 {
            vertices,
            tets,
            edges,
            faces: sorted_faces,
            edge_index,
            face_index,
            face_tets,
            boundary_faces,
            on_boundary,
            gamma,
        })
    }

    pub fn vertices(&self) -> &[[f64; 3]] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    /// (V, E, F, T)
    pub fn counts(&self) -> [usize; 4] {
        [self.vertices.len(), self.edges.len(), self.faces.len(), self.tets.len()]
    }

    pub fn count(&self, k: usize) -> usize {
        self.counts()[k]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&sorted([a, b])).copied()
    }

    pub fn face_id(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        self.face_index.get(&sorted([a, b, c])).copied()
    }

    /// Sorted vertex tuple of a degree-`k` simplex (stored order for tets).
    pub fn simplex(&self, k: usize, i: usize) -> Vec<usize> {
        match k {
            0 => vec![i],
            1 => self.edges[i].to_vec(),
            2 => self.faces[i].to_vec(),
            _ => self.tets[i].to_vec(),
        }
    }

    pub fn simplex_id(&self, verts: &[usize]) -> Option<usize> {
        match verts.len() {
            1 => (verts[0] < self.vertices.len()).then_some(verts[0]),
            2 => self.edge_id(verts[0], verts[1]),
            3 => self.face_id(verts[0], verts[1], verts[2]),
            _ => None,
        }
    }

    pub fn face_tets(&self, f: usize) -> &[usize] {
        &self.face_tets[f]
    }

    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }

    pub fn is_boundary(&self, k: usize, i: usize) -> bool {
        self.on_boundary[k][i]
    }

    pub fn boundary_mask(&self, k: usize) -> &[bool] {
        &self.on_boundary[k]
    }

    /// Ids of boundary simplices of degree `k` in increasing order.
    pub fn boundary_simplices(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&i| self.on_boundary[k][i]).collect()
    }

    pub fn interior_simplices(&self, k: usize) -> Vec<usize> {
        (0..self.count(k)).filter(|&i| !self.on_boundary[k][i]).collect()
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub(crate) fn with_gamma(&self, gamma: Vec<usize>) -> Result<Self, CoreError> {
        if gamma.is_empty() {
            return Err(CoreError::Malformed("gamma is empty".into()));
        }
        if let Some(&f) = gamma.iter().find(|&&f| f >= self.faces.len() || !self.on_boundary[2][f]) {
            return Err(CoreError::Malformed(format!("gamma face {f} is not a boundary face")));
        }
        let mut c = self.clone();
        let mut g = gamma;
        g.sort_unstable();
        g.dedup();
        c.gamma = g;
        Ok(c)
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    pub fn volume(&self, t: usize) -> f64 {
        tet_volume(&self.vertices, &self.tets[t])
    }

    /// Signed incidence of degree `k` into `k + 1`, rows indexed by `(k+1)`-simplices.
    pub fn incidence(&self, k: usize) -> SignedIncidence {
        assert!(k < 3, "coboundary degree out of range");
        let mut m = SignedIncidence::new(self.count(k + 1), self.count(k));
        for r in 0..self.count(k + 1) {
            let s = self.simplex(k + 1, r);
            for i in 0..s.len() {
                let face: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                let sign = if i % 2 == 0 { 1 } else { -1 } * perm_sign(&face);
                let mut key = face.clone();
                key.sort_unstable();
                let c = self.simplex_id(&key).expect("face of a simplex is in the complex");
                m.entries.push((r as u32, c as u32, sign));
            }
        }
        m
    }

    /// Boundary surface coboundary of degree `k` (0 or 1), on boundary simplices
    /// numbered in increasing global id.
    pub fn boundary_incidence(&self, k: usize) -> SignedIncidence {
        let rows = self.boundary_simplices(k + 1);
        let cols = self.boundary_simplices(k);
        let col_of: HashMap<usize, usize> = cols.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let row_of: HashMap<usize, usize> = rows.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let full = self.incidence(k);
        let mut m = SignedIncidence::new(rows.len(), cols.len());
        for &(r, c, s) in &full.entries {
            if let Some(&rr) = row_of.get(&(r as usize)) {
                let cc = col_of[&(c as usize)];
                m.entries.push((rr as u32, cc as u32, s));
            }
        }
        m
    }

    pub fn surface_counts(&self) -> SurfaceCounts {
        SurfaceCounts {
            vertices: self.on_boundary[0].iter().filter(|&&b| b).count(),
            edges: self.on_boundary[1].iter().filter(|&&b| b).count(),
            faces: self.boundary_faces.len(),
        }
    }

    /// Boundary faces incident to each boundary simplex of degree `k`.
    fn boundary_star(&self, k: usize) -> Vec<Vec<usize>> {
        let mut star = vec![Vec::new(); self.count(k)];
        for &f in &self.boundary_faces {
            let [a, b, c] = self.faces[f];
            match k {
                0 => [a, b, c].iter().for_each(|&v| star[v].push(f)),
                1 => [[a, b], [a, c], [b, c]].iter().for_each(|e| star[self.edge_index[e]].push(f)),
                _ => star[f].push(f),
            }
        }
        star
    }

    /// Global ids of the closure of gamma, per degree, in increasing order.
    pub fn gamma_closure(&self) -> [Vec<usize>; 3] {
        let mut mark = [vec![false; self.count(0)], vec![false; self.count(1)], vec![false; self.count(2)]];
        for &f in &self.gamma {
            let [a, b, c] = self.faces[f];
            mark[2][f] = true;
            for v in [a, b, c] {
                mark[0][v] = true;
            }
            for e in [[a, b], [a, c], [b, c]] {
                mark[1][self.edge_index[&e]] = true;
            }
        }
        mark.map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
    }

    /// The patch as seen from the boundary: closure simplices, the admissible
    /// source support (whole boundary star inside gamma), and the restricted
    /// surface coboundaries.
    pub fn boundary_patch(&self) -> BoundaryPatch {
        let closure = self.gamma_closure();
        let mut in_gamma = vec![false; self.count(2)];
        self.gamma.iter().for_each(|&f| in_gamma[f] = true);
        let admissible: [Vec<bool>; 3] = std::array::from_fn(|k| {
            let star = self.boundary_star(k);
            closure[k].iter().map(|&s| star[s].iter().all(|&f| in_gamma[f])).collect()
        });
        let coboundary: [SignedIncidence; 2] = std::array::from_fn(|k| {
            let local: HashMap<usize, usize> = closure[k].iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let local_up: HashMap<usize, usize> = closure[k + 1].iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let mut m = SignedIncidence::new(closure[k + 1].len(), closure[k].len());
            for &(r, c, s) in &self.incidence(k).entries {
                if let Some(&rr) = local_up.get(&(r as usize)) {
                    m.entries.push((rr as u32, local[&(c as usize)] as u32, s));
                }
            }
            m
        });
        BoundaryPatch {
            simplices: std::array::from_fn(|k| closure[k].iter().map(|&i| self.simplex(k, i)).collect()),
            admissible,
            coboundary,
            surface: self.surface_counts(),
            patch_faces: self.gamma.len(),
        }
    }

    /// Euler characteristic V - E + F - T.
    pub fn euler(&self) -> i64 {
        let [v, e, f, t] = self.counts().map(|x| x as i64);
        v - e + f - t
    }

    pub fn boundary_euler(&self) -> i64 {
        self.surface_counts().euler()
    }
}

fn diameter(x: &[[f64; 3]]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in x {
        for d in 0..3 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt()
}
