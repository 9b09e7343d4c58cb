//! Cochains, material-weighted Whitney mass matrices, coboundaries,
//! codifferentials and the two boundary traces.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use dirac_boundary::SignedIncidence;
use nalgebra::{Matrix3, Matrix4x3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mesh::SimplicialComplex3;
use crate::sparse::{self, Csr, Ldl};
use crate::CoreError;

/// Per-tetrahedron SPD permittivity and permeability tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialField {
    pub eps: Vec<Matrix3<f64>>,
    pub mu: Vec<Matrix3<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TetMaterial {
    pub eps: [[f64; 3]; 3],
    pub mu: [[f64; 3]; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaterialFile {
    pub default_eps: [[f64; 3]; 3],
    pub default_mu: [[f64; 3]; 3],
    #[serde(default)]
    pub per_tet: BTreeMap<String, TetMaterial>,
}

fn from_rows(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// `Q diag(e) Q^T` with eigenvalues log-uniform in `[1, cond]`.
pub fn random_spd(rng: &mut impl Rng, cond: f64) -> Matrix3<f64> {
    let a = Matrix3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
    let q = a.qr().q();
    let hi = cond.max(1.0).ln();
    let e = Matrix3::from_diagonal(&nalgebra::Vector3::from_fn(|_, _| rng.gen_range(0.0..=hi).exp()));
    let m = q * e * q.transpose();
    (m + m.transpose()) * 0.5
}

pub fn check_spd(m: &Matrix3<f64>) -> Result<(), String> {
    let scale = m.amax();
    if !(scale.is_finite() && scale > 0.0) {
        return Err("zero or non-finite tensor".into());
    }
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err("tensor is not symmetric".into());
    }
    let ev = SymmetricEigen::new(*m).eigenvalues;
    if ev.min() <= 1e-14 * scale {
        return Err(format!("tensor is not positive definite (eigenvalues {:?})", ev.as_slice()));
    }
    Ok(())
}

impl MaterialField {
    pub fn identity(n_tets: usize) -> Self {
        MaterialField { eps: vec![Matrix3::identity(); n_tets], mu: vec![Matrix3::identity(); n_tets] }
    }

    pub fn random(n_tets: usize, seed: u64, cond: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut eps = Vec::with_capacity(n_tets);
        let mut mu = Vec::with_capacity(n_tets);
        for _ in 0..n_tets {
            eps.push(random_spd(&mut rng, cond));
            mu.push(random_spd(&mut rng, cond));
        }
        MaterialField { eps, mu }
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn validate(&self, n_tets: usize) -> Result<(), CoreError> {
        if self.eps.len() != n_tets || self.mu.len() != n_tets {
            return Err(CoreError::Material(format!("{} / {} tensors for {n_tets} tetrahedra", self.eps.len(), self.mu.len())));
        }
        for (t, (e, m)) in self.eps.iter().zip(&self.mu).enumerate() {
            check_spd(e).map_err(|s| CoreError::Material(format!("eps of tet {t}: {s}")))?;
            check_spd(m).map_err(|s| CoreError::Material(format!("mu of tet {t}: {s}")))?;
        }
        Ok(())
    }

    pub fn from_file_data(f: &MaterialFile, n_tets: usize) -> Result<Self, CoreError> {
        let mut out = MaterialField { eps: vec![from_rows(&f.default_eps); n_tets], mu: vec![from_rows(&f.default_mu); n_tets] };
        for (key, tm) in &f.per_tet {
            let t: usize = key.parse().map_err(|_| CoreError::Material(format!("bad tet index '{key}'")))?;
            if t >= n_tets {
                return Err(CoreError::Material(format!("tet index {t} out of range")));
            }
            out.eps[t] = from_rows(&tm.eps);
            out.mu[t] = from_rows(&tm.mu);
        }
        out.validate(n_tets)?;
        Ok(out)
    }

    pub fn load(path: &Path, n_tets: usize) -> Result<Self, CoreError> {
        let f: MaterialFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_file_data(&f, n_tets)
    }

    /// Every tensor listed explicitly; defaults are the identity.
    pub fn to_file_data(&self) -> MaterialFile {
        let id = to_rows(&Matrix3::identity());
        MaterialFile {
            default_eps: id,
            default_mu: id,
            per_tet: (0..self.len())
                .map(|t| (t.to_string(), TetMaterial { eps: to_rows(&self.eps[t]), mu: to_rows(&self.mu[t]) }))
                .collect(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        std::fs::write(path, serde_json::to_string(&self.to_file_data())?)?;
        Ok(())
    }

    pub(crate) fn bytes(&self) -> Vec<u8> {
        self.eps.iter().chain(&self.mu).flat_map(|m| m.iter().flat_map(|x| x.to_le_bytes())).collect()
    }
}

/// Covariant metric induced by a material tensor: its inverse is
/// `m g0^{-1} / det(m)`.
pub fn material_metric(m: &Matrix3<f64>, g0: &Matrix3<f64>) -> Result<Matrix3<f64>, CoreError> {
    check_spd(m).map_err(CoreError::Material)?;
    check_spd(g0).map_err(CoreError::Material)?;
    let g0_inv = g0.try_inverse().ok_or_else(|| CoreError::Material("singular background metric".into()))?;
    let inv = m * g0_inv / m.determinant();
    if (inv - inv.transpose()).amax() > 1e-12 * inv.amax() {
        return Err(CoreError::Material("material and background metric do not commute; induced metric not symmetric".into()));
    }
    let g = inv.try_inverse().ok_or_else(|| CoreError::Material("singular induced metric".into()))?;
    let g = (g + g.transpose()) * 0.5;
    check_spd(&g).map_err(CoreError::Material)?;
    Ok(g)
}

fn det_sub(a: &nalgebra::Matrix4<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => a[(rows[0], cols[0])],
        2 => a[(rows[0], cols[0])] * a[(rows[1], cols[1])] - a[(rows[0], cols[1])] * a[(rows[1], cols[0])],
        3 => {
            let m = Matrix3::from_fn(|i, j| a[(rows[i], cols[j])]);
            m.determinant()
        }
        _ => unreachable!(),
    }
}

fn subsets(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..16 {
        if mask.count_ones() as usize == k + 1 {
            out.push((0..4).filter(|i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// Local Whitney mass matrix of degree `k` on one tet.  `ls` lists the local
/// vertex tuples, each ordered to match the global orientation.
fn local_mass(x: &[[f64; 3]; 4], g_inv: &Matrix3<f64>, sqrt_det: f64, ls: &[Vec<usize>], k: usize) -> Vec<Vec<f64>> {
    let j = Matrix3::from_fn(|r, c| x[c + 1][r] - x[0][r]);
    let vol = j.determinant().abs() / 6.0;
    let jinv = j.try_inverse().expect("non-degenerate tet");
    // rows: gradients of barycentric coordinates
    let mut grads = Matrix4x3::zeros();
    for i in 0..3 {
        for c in 0..3 {
            grads[(i + 1, c)] = jinv[(i, c)];
            grads[(0, c)] -= jinv[(i, c)];
        }
    }
    let a = grads * g_inv * grads.transpose();
    let n = ls.len();
    let mut m = vec![vec![0.0; n]; n];
    for (p, s1) in ls.iter().enumerate() {
        for (q, s2) in ls.iter().enumerate().skip(p) {
            let mut val = 0.0;
            for i in 0..=k {
                let r1: Vec<usize> = (0..=k).filter(|&a| a != i).map(|a| s1[a]).collect();
                for jj in 0..=k {
                    let r2: Vec<usize> = (0..=k).filter(|&b| b != jj).map(|b| s2[b]).collect();
                    let integ = vol * if s1[i] == s2[jj] { 2.0 } else { 1.0 } / 20.0;
                    let sign = if (i + jj) % 2 == 0 { 1.0 } else { -1.0 };
                    val += sign * integ * det_sub(&a, &r1, &r2);
                }
            }
            let v = FACT[k] * FACT[k] * val * sqrt_det;
            m[p][q] = v;
            m[q][p] = v;
        }
    }
    m
}

/// Galerkin mass matrix of Whitney `k`-forms in the metric of `mu`
/// (k = 0, 2) or `eps` (k = 1, 3).
pub fn assemble_mass(c: &SimplicialComplex3, mat: &MaterialField, k: usize) -> Result<Csr, CoreError> {
    assert!(k <= 3);
    mat.validate(c.tets().len())?;
    let diam = c.diameter();
    let local_sets = subsets(k);
    let mut trip = Vec::with_capacity(c.tets().len() * local_sets.len() * local_sets.len());
    for (ti, t) in c.tets().iter().enumerate() {
        let vol = c.volume(ti);
        if vol.abs() < 1e-12 * diam.powi(3) {
            return Err(CoreError::Degenerate { tet: ti, volume: vol });
        }
        let m = if k % 2 == 0 { &mat.mu[ti] } else { &mat.eps[ti] };
        let g = material_metric(m, &Matrix3::identity())?;
        let g_inv = g.try_inverse().expect("checked SPD");
        let sqrt_det = g.determinant().sqrt();
        let x = t.map(|v| c.vertices()[v]);
        let mut ls = Vec::with_capacity(local_sets.len());
        let mut ids = Vec::with_capacity(local_sets.len());
        for s in &local_sets {
            if k == 3 {
                ls.push(vec![0, 1, 2, 3]);
                ids.push(ti);
                continue;
            }
            let mut o = s.clone();
            o.sort_by_key(|&i| t[i]);
            let gv: Vec<usize> = o.iter().map(|&i| t[i]).collect();
            ids.push(c.simplex_id(&gv).expect("tet sub-simplex exists"));
            ls.push(o);
        }
        let lm = local_mass(&x, &g_inv, sqrt_det, &ls, k);
        for (p, &gp) in ids.iter().enumerate() {
            for (q, &gq) in ids.iter().enumerate() {
                trip.push((gp, gq, lm[p][q]));
            }
        }
    }
    let n = c.count(k);
    Ok(sparse::from_triplets(n, n, &trip))
}

/// Signed incidence of the coboundary `d_k`, exact integers.
pub fn coboundary(c: &SimplicialComplex3, k: usize) -> SignedIncidence {
    c.incidence(k)
}

pub fn incidence_to_csr(m: &SignedIncidence) -> Csr {
    let trip: Vec<(usize, usize, f64)> = m.entries.iter().map(|&(r, c, s)| (r as usize, c as usize, s as f64)).collect();
    sparse::from_triplets(m.rows, m.cols, &trip)
}

/// A graded state; `relative` states carry interior coefficients only.
#[derive(Clone, Debug, PartialEq)]
pub struct CochainState {
    pub parts: [Vec<f64>; 4],
    pub relative: bool,
}

impl CochainState {
    pub fn zeros(sizes: [usize; 4], relative: bool) -> Self {
        CochainState { parts: sizes.map(|n| vec![0.0; n]), relative }
    }

    pub fn degree(k: usize, values: Vec<f64>, sizes: [usize; 4], relative: bool) -> Self {
        let mut s = Self::zeros(sizes, relative);
        assert_eq!(values.len(), sizes[k]);
        s.parts[k] = values;
        s
    }

    pub fn sizes(&self) -> [usize; 4] {
        std::array::from_fn(|k| self.parts[k].len())
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.parts.concat()
    }

    pub fn from_flat(x: &[f64], sizes: [usize; 4], relative: bool) -> Self {
        let mut off = 0;
        let parts = sizes.map(|n| {
            let p = x[off..off + n].to_vec();
            off += n;
            p
        });
        CochainState { parts, relative }
    }
}

/// Coboundaries, mass matrices and their factorizations, on full and on
/// relative (interior) degrees of freedom.
pub struct GradedOperator {
    complex: Arc<SimplicialComplex3>,
    material: Arc<MaterialField>,
    pub d_int: [SignedIncidence; 3],
    pub d: [Csr; 3],
    pub g: [Csr; 4],
    g_fac: [Ldl; 4],
    interior: [Vec<usize>; 4],
    boundary: [Vec<usize>; 4],
    g_int_fac: [Option<Ldl>; 4],
}

impl GradedOperator {
    pub fn new(complex: Arc<SimplicialComplex3>, material: Arc<MaterialField>) -> Result<Self, CoreError> {
        let c = &*complex;
        let d_int: [SignedIncidence; 3] = std::array::from_fn(|k| coboundary(c, k));
        let d = std::array::from_fn(|k| incidence_to_csr(&d_int[k]));
        let mut g = Vec::with_capacity(4);
        for k in 0..4 {
            g.push(assemble_mass(c, &material, k)?);
        }
        let g: [Csr; 4] = g.try_into().map_err(|_| CoreError::Solver("mass assembly".into()))?;
        let mut g_fac = Vec::with_capacity(4);
        for gk in &g {
            let f = Ldl::factor(gk)?;
            if f.negative_pivots() > 0 {
                return Err(CoreError::Solver("mass matrix is not positive definite".into()));
            }
            g_fac.push(f);
        }
        let interior: [Vec<usize>; 4] = std::array::from_fn(|k| c.interior_simplices(k));
        let boundary: [Vec<usize>; 4] = std::array::from_fn(|k| c.boundary_simplices(k));
        let mut g_int_fac = Vec::with_capacity(4);
        for k in 0..4 {
            g_int_fac.push(if interior[k].is_empty() {
                None
            } else {
                let map = sparse::index_map(c.count(k), &interior[k]);
                Some(Ldl::factor(&sparse::extract(&g[k], &interior[k], &map, interior[k].len()))?)
            });
        }
        Ok(GradedOperator {
            complex,
            material,
            d_int,
            d,
            g,
            g_fac: g_fac.try_into().map_err(|_| CoreError::Solver("factorization".into()))?,
            interior,
            boundary,
            g_int_fac: g_int_fac.try_into().map_err(|_| CoreError::Solver("factorization".into()))?,
        })
    }

    pub fn complex(&self) -> &SimplicialComplex3 {
        &self.complex
    }

    pub fn complex_arc(&self) -> Arc<SimplicialComplex3> {
        self.complex.clone()
    }

    pub fn material(&self) -> &MaterialField {
        &self.material
    }

    pub fn interior(&self, k: usize) -> &[usize] {
        &self.interior[k]
    }

    pub fn boundary(&self, k: usize) -> &[usize] {
        &self.boundary[k]
    }

    pub fn full_sizes(&self) -> [usize; 4] {
        std::array::from_fn(|k| self.complex.count(k))
    }

    pub fn relative_sizes(&self) -> [usize; 4] {
        std::array::from_fn(|k| self.interior[k].len())
    }

    /// `G_k^{-1} b` on all simplices of degree `k`.
    pub fn mass_solve(&self, k: usize, b: &[f64]) -> Vec<f64> {
        self.g_fac[k].solve(b)
    }

    pub fn inner(&self, k: usize, a: &[f64], b: &[f64]) -> f64 {
        let gb = sparse::mul(&self.g[k], b);
        a.iter().zip(&gb).map(|(x, y)| x * y).sum()
    }

    /// `d_k x`
    pub fn apply_d(&self, k: usize, x: &[f64]) -> Vec<f64> {
        sparse::mul(&self.d[k], x)
    }

    /// Codifferential on all simplices: `G_{k-1}^{-1} d_{k-1}^T G_k x`.
    pub fn codifferential(&self, k: usize, x: &[f64]) -> Vec<f64> {
        assert!((1..=3).contains(&k));
        let gx = sparse::mul(&self.g[k], x);
        self.mass_solve(k - 1, &sparse::mul_t(&self.d[k - 1], &gx))
    }

    /// Codifferential for the relative condition: the interior part of
    /// `d^T G x` solved against the interior mass block, extended by zero.
    pub fn codifferential_relative(&self, k: usize, x: &[f64]) -> Vec<f64> {
        assert!((1..=3).contains(&k));
        let gx = sparse::mul(&self.g[k], x);
        let r = sparse::mul_t(&self.d[k - 1], &gx);
        let mut out = vec![0.0; self.complex.count(k - 1)];
        if let Some(f) = &self.g_int_fac[k - 1] {
            let ri: Vec<f64> = self.interior[k - 1].iter().map(|&i| r[i]).collect();
            let y = f.solve(&ri);
            for (&i, v) in self.interior[k - 1].iter().zip(y) {
                out[i] = v;
            }
        }
        out
    }

    /// Restriction to boundary simplices of degree `k` (increasing id).
    pub fn trace_t(&self, state: &CochainState, k: usize) -> Vec<f64> {
        assert!(!state.relative, "tangential trace of a relative state is zero by construction");
        self.boundary[k].iter().map(|&i| state.parts[k][i]).collect()
    }

    /// Normal trace of the degree-`k` part, on boundary `(k-1)`-simplices: the
    /// unique functional with `(d eta, w) - (eta, delta w) = <t eta, n w>` for
    /// every `(k-1)`-cochain `eta`.
    pub fn trace_n(&self, state: &CochainState, k: usize) -> Vec<f64> {
        assert!((1..=3).contains(&k));
        let w = self.full_part(state, k);
        let gw = sparse::mul(&self.g[k], &w);
        let dtgw = sparse::mul_t(&self.d[k - 1], &gw);
        let delta = self.codifferential_relative(k, &w);
        let gd = sparse::mul(&self.g[k - 1], &delta);
        self.boundary[k - 1].iter().map(|&i| dtgw[i] - gd[i]).collect()
    }

    /// Degree-`k` coefficients on all simplices (zero-extends relative states).
    pub fn full_part(&self, state: &CochainState, k: usize) -> Vec<f64> {
        if !state.relative {
            return state.parts[k].clone();
        }
        let mut out = vec![0.0; self.complex.count(k)];
        for (&i, &v) in self.interior[k].iter().zip(&state.parts[k]) {
            out[i] = v;
        }
        out
    }

    /// Spectral condition numbers of the four mass matrices (dense; small meshes).
    pub fn mass_conditions(&self) -> [f64; 4] {
        std::array::from_fn(|k| {
            let ev = SymmetricEigen::new(sparse::to_dense(&self.g[k])).eigenvalues;
            ev.max() / ev.min()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn metric_of_identity_and_scalar() {
        let i = Matrix3::identity();
        assert_relative_eq!(material_metric(&i, &i).unwrap(), i, epsilon = 1e-15);
        let a = 2.5;
        assert_relative_eq!(material_metric(&(i * a), &i).unwrap(), i * a * a, epsilon = 1e-13);
    }

    #[test]
    fn metric_rejects_indefinite() {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -1.0, 2.0));
        assert!(material_metric(&m, &Matrix3::identity()).is_err());
    }

    proptest! {
        #[test]
        fn metric_volume_identity(seed in 0u64..1000, cond in 1.0f64..20.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_spd(&mut rng, cond);
            let g = material_metric(&m, &Matrix3::identity()).unwrap();
            prop_assert!(check_spd(&g).is_ok());
            prop_assert!((g.determinant().sqrt() - m.determinant()).abs() < 1e-12 * m.determinant());
        }

        #[test]
        fn random_spd_respects_condition(seed in 0u64..1000, cond in 1.0f64..50.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ev = SymmetricEigen::new(random_spd(&mut rng, cond)).eigenvalues;
            prop_assert!(ev.min() > 0.0);
            prop_assert!(ev.max() / ev.min() <= cond * (1.0 + 1e-10));
        }
    }

    #[test]
    fn unit_tet_volume_mass() {
        let c = build_single_tet();
        let g3 = assemble_mass(&c, &MaterialField::identity(1), 3).unwrap();
        assert_relative_eq!(sparse::to_dense(&g3)[(0, 0)], 1.0 / c.volume(0), epsilon = 1e-12);
    }

    #[test]
    fn vertex_mass_is_p1_mass() {
        let c = build_single_tet();
        let g0 = sparse::to_dense(&assemble_mass(&c, &MaterialField::identity(1), 0).unwrap());
        let v = c.volume(0);
        for i in 0..4 {
            for j in 0..4 {
                let want = v * if i == j { 2.0 } else { 1.0 } / 20.0;
                assert_relative_eq!(g0[(i, j)], want, epsilon = 1e-14);
            }
        }
    }

    /// 1-form mass checked against a direct quadrature of Whitney forms,
    /// which is exact for the quadratic integrands at degree 2.
    #[test]
    fn edge_mass_matches_quadrature() {
        let c = build_single_tet();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mat = MaterialField { eps: vec![random_spd(&mut rng, 4.0)], mu: vec![Matrix3::identity()] };
        let g1 = sparse::to_dense(&assemble_mass(&c, &mat, 1).unwrap());
        let g = material_metric(&mat.eps[0], &Matrix3::identity()).unwrap();
        let g_inv = g.try_inverse().unwrap();
        let sq = g.determinant().sqrt();
        let grad = [
            nalgebra::Vector3::new(-1.0, -1.0, -1.0),
            nalgebra::Vector3::new(1.0, 0.0, 0.0),
            nalgebra::Vector3::new(0.0, 1.0, 0.0),
            nalgebra::Vector3::new(0.0, 0.0, 1.0),
        ];
        // degree-2 exact rule on the reference tet
        let a = 0.585_410_196_624_968_5;
        let b = 0.138_196_601_125_010_5;
        let pts = [[a, b, b, b], [b, a, b, b], [b, b, a, b], [b, b, b, a]];
        let whitney = |e: &[usize; 2], l: &[f64; 4]| l[e[0]] * grad[e[1]] - l[e[1]] * grad[e[0]];
        for (p, ep) in c.edges().iter().enumerate() {
            for (q, eq) in c.edges().iter().enumerate() {
                let mut s = 0.0;
                for l in &pts {
                    let u = whitney(ep, l);
                    let w = whitney(eq, l);
                    s += (u.transpose() * g_inv * w)[(0, 0)] * sq * c.volume(0) / 4.0;
                }
                assert_relative_eq!(g1[(p, q)], s, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn masses_positive_definite_under_random_materials() {
        let c = refine(&build_solid_torus(3).unwrap()).unwrap();
        let mat = MaterialField::random(c.tets().len(), 11, 10.0);
        for k in 0..4 {
            let ev = SymmetricEigen::new(sparse::to_dense(&assemble_mass(&c, &mat, k).unwrap())).eigenvalues;
            assert!(ev.min() > 0.0, "degree {k}");
        }
    }

    #[test]
    fn material_file_round_trip() {
        let mat = MaterialField::random(5, 2, 3.0);
        let back = MaterialField::from_file_data(&mat.to_file_data(), 5).unwrap();
        assert_eq!(back, mat);
        let mut bad = mat.to_file_data();
        bad.per_tet.get_mut("2").unwrap().mu[0][0] = -5.0;
        assert!(MaterialField::from_file_data(&bad, 5).is_err());
    }
}
