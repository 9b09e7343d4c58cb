//! The graded first-order operator on relative cochains, in the
//! mass-weighted form `G u' + K u = 0` with `K` skew.

use std::fmt::Write as _;
use std::sync::Arc;

use dirac_boundary::BoundaryPatch;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::forms::{CochainState, GradedOperator, MaterialField};
use crate::mesh::SimplicialComplex3;
use crate::sparse::{self, Csr, Ldl};
use crate::CoreError;

/// Kernel threshold relative to the largest eigenvalue of the squared operator.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

/// Required ratio between the first eigenvalue outside the kernel and the
/// last one inside it.
pub const KERNEL_GAP: f64 = 10.0;

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut off = vec![0];
    for s in sizes {
        off.push(off.last().unwrap() + s);
    }
    off
}

/// G-orthonormal basis of the discrete harmonic fields, graded by degree.
#[derive(Clone, Debug)]
pub struct HarmonicBasis {
    /// Per degree, relative states with only that degree populated.
    pub fields: [Vec<CochainState>; 4],
    /// Per degree, ascending eigenvalues of the squared operator.
    pub ladder: [Vec<f64>; 4],
    pub threshold: f64,
}

impl HarmonicBasis {
    pub fn dims(&self) -> [usize; 4] {
        std::array::from_fn(|k| self.fields[k].len())
    }
}

struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

pub struct DiracSystem {
    op: GradedOperator,
    full_off: [usize; 5],
    rel_off: [usize; 5],
    bnd_off: [usize; 5],
    /// Flat full-state index of each interior / boundary dof.
    interior_flat: Vec<usize>,
    boundary_flat: Vec<usize>,
    pub g_full: Csr,
    pub k_full: Csr,
    pub g_ii: Csr,
    pub g_ib: Csr,
    pub k_ii: Csr,
    pub k_ib: Csr,
    g_ii_fac: Ldl,
    patch: BoundaryPatch,
    /// Global ids of the patch closure simplices, degrees 0..2.
    patch_ids: [Vec<usize>; 3],
    /// Position of each patch simplex in the flat boundary numbering.
    patch_to_boundary: [Vec<usize>; 3],
    /// Rows of `G` and `K` on the patch closure, degrees 0..2 concatenated.
    pub g_patch: Csr,
    pub k_patch: Csr,
    patch_off: [usize; 4],
    fingerprint: String,
}

pub fn assemble_dirac(c: &SimplicialComplex3, mat: &MaterialField) -> Result<DiracSystem, CoreError> {
    DiracSystem::new(Arc::new(c.clone()), Arc::new(mat.clone()))
}

impl DiracSystem {
    pub fn new(complex: Arc<SimplicialComplex3>, material: Arc<MaterialField>) -> Result<Self, CoreError> {
        let op = GradedOperator::new(complex, material)?;
        let c = op.complex();
        let counts = c.counts();
        let full_off: [usize; 5] = offsets(&counts).try_into().unwrap();
        let rel_off: [usize; 5] = offsets(&op.relative_sizes()).try_into().unwrap();
        let bsizes: [usize; 4] = std::array::from_fn(|k| op.boundary(k).len());
        let bnd_off: [usize; 5] = offsets(&bsizes).try_into().unwrap();
        let n = full_off[4];

        let mut g_trip = Vec::new();
        for k in 0..4 {
            for (i, j, &v) in op.g[k].triplet_iter() {
                g_trip.push((full_off[k] + i, full_off[k] + j, v));
            }
        }
        let mut k_trip = Vec::new();
        for k in 0..3 {
            let blk = &op.g[k + 1] * &op.d[k];
            for (i, j, &v) in blk.triplet_iter() {
                k_trip.push((full_off[k + 1] + i, full_off[k] + j, v));
                k_trip.push((full_off[k] + j, full_off[k + 1] + i, -v));
            }
        }
        let g_full = sparse::from_triplets(n, n, &g_trip);
        let k_full = sparse::from_triplets(n, n, &k_trip);

        let interior_flat: Vec<usize> = (0..4).flat_map(|k| op.interior(k).iter().map(move |&i| full_off[k] + i)).collect();
        let boundary_flat: Vec<usize> = (0..4).flat_map(|k| op.boundary(k).iter().map(move |&i| full_off[k] + i)).collect();
        let imap = sparse::index_map(n, &interior_flat);
        let bmap = sparse::index_map(n, &boundary_flat);
        let ni = interior_flat.len();
        let nb = boundary_flat.len();
        let g_ii = sparse::extract(&g_full, &interior_flat, &imap, ni);
        let g_ib = sparse::extract(&g_full, &interior_flat, &bmap, nb);
        let k_ii = sparse::extract(&k_full, &interior_flat, &imap, ni);
        let k_ib = sparse::extract(&k_full, &interior_flat, &bmap, nb);
        let g_ii_fac = Ldl::factor(&g_ii)?;

        let patch = c.boundary_patch();
        let patch_ids = c.gamma_closure();
        let patch_to_boundary: [Vec<usize>; 3] = std::array::from_fn(|k| {
            let pos = sparse::index_map(counts[k], op.boundary(k));
            patch_ids[k].iter().map(|&g| bnd_off[k] + pos[g].expect("patch simplex on the boundary")).collect()
        });
        let patch_rows: Vec<usize> = (0..3).flat_map(|k| patch_ids[k].iter().map(move |&i| full_off[k] + i)).collect();
        let all = (0..n).map(Some).collect::<Vec<_>>();
        let g_patch = sparse::extract(&g_full, &patch_rows, &all, n);
        let k_patch = sparse::extract(&k_full, &patch_rows, &all, n);
        let patch_off: [usize; 4] = offsets(&patch_ids.each_ref().map(|v| v.len())).try_into().unwrap();

        let fingerprint = fingerprint(c, op.material());
        Ok(DiracSystem {
            op,
            full_off,
            rel_off,
            bnd_off,
            interior_flat,
            boundary_flat,
            g_full,
            k_full,
            g_ii,
            g_ib,
            k_ii,
            k_ib,
            g_ii_fac,
            patch,
            patch_ids,
            patch_to_boundary,
            g_patch,
            k_patch,
            patch_off,
            fingerprint,
        })
    }

    pub fn operator(&self) -> &GradedOperator {
        &self.op
    }

    pub fn complex(&self) -> &SimplicialComplex3 {
        self.op.complex()
    }

    pub fn material(&self) -> &MaterialField {
        self.op.material()
    }

    pub fn patch(&self) -> &BoundaryPatch {
        &self.patch
    }

    pub fn patch_ids(&self, k: usize) -> &[usize] {
        &self.patch_ids[k]
    }

    pub fn patch_to_boundary(&self, k: usize) -> &[usize] {
        &self.patch_to_boundary[k]
    }

    pub fn patch_offsets(&self) -> [usize; 4] {
        self.patch_off
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn n_full(&self) -> usize {
        self.full_off[4]
    }

    pub fn n_interior(&self) -> usize {
        self.interior_flat.len()
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary_flat.len()
    }

    pub fn full_offsets(&self) -> [usize; 5] {
        self.full_off
    }

    pub fn relative_offsets(&self) -> [usize; 5] {
        self.rel_off
    }

    pub fn boundary_offsets(&self) -> [usize; 5] {
        self.bnd_off
    }

    pub fn relative_sizes(&self) -> [usize; 4] {
        self.op.relative_sizes()
    }

    pub fn interior_flat(&self) -> &[usize] {
        &self.interior_flat
    }

    pub fn boundary_flat(&self) -> &[usize] {
        &self.boundary_flat
    }

    pub fn g_ii_factor(&self) -> &Ldl {
        &self.g_ii_fac
    }

    /// Relative state `v` as a flat interior vector.
    pub fn flatten_relative(&self, s: &CochainState) -> Vec<f64> {
        assert!(s.relative);
        s.flatten()
    }

    pub fn relative_state(&self, v: &[f64]) -> CochainState {
        CochainState::from_flat(v, self.relative_sizes(), true)
    }

    /// Full graded state from interior values and flat boundary values.
    pub fn full_state(&self, v: &[f64], f: &[f64]) -> CochainState {
        let mut x = vec![0.0; self.n_full()];
        for (&i, &a) in self.interior_flat.iter().zip(v) {
            x[i] = a;
        }
        for (&i, &a) in self.boundary_flat.iter().zip(f) {
            x[i] = a;
        }
        CochainState::from_flat(&x, self.op.full_sizes(), false)
    }

    /// `D v = G_II^{-1} K_II v` on relative states.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.g_ii_fac.solve(&sparse::mul(&self.k_ii, v))
    }

    /// `(a, b)_G` of two flat relative vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let gb = sparse::mul(&self.g_ii, b);
        a.iter().zip(&gb).map(|(x, y)| x * y).sum()
    }

    /// Degree-`k` part of `(a, b)_G` on flat relative vectors.
    pub fn inner_degree(&self, k: usize, a: &[f64], b: &[f64]) -> f64 {
        let r = self.rel_off[k]..self.rel_off[k + 1];
        let (a, b) = (&a[r.clone()], &b[r]);
        self.op.inner(k, &self.op.full_part(&CochainState::degree(k, a.to_vec(), self.relative_sizes(), true), k), &{
            let s = CochainState::degree(k, b.to_vec(), self.relative_sizes(), true);
            self.op.full_part(&s, k)
        })
    }

    /// `|G D + D^T G| / |G D|` in the max norm; `G D` is `K_II`.
    pub fn skew_residual(&self) -> f64 {
        let sum = &self.k_ii + &self.k_ii.transpose();
        sparse::max_abs(&sum) / sparse::max_abs(&self.k_ii).max(f64::MIN_POSITIVE)
    }

    /// Largest degree-mixing part of `D^2` applied to random single-degree
    /// states, relative to the degree-preserving part.
    pub fn square_mixing_residual(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for k in 0..4 {
            if self.rel_off[k] == self.rel_off[k + 1] {
                continue;
            }
            let mut v = vec![0.0; self.n_interior()];
            for x in &mut v[self.rel_off[k]..self.rel_off[k + 1]] {
                *x = rng.gen_range(-1.0..1.0);
            }
            let w = self.apply(&self.apply(&v));
            let norm = |r: std::ops::Range<usize>| w[r].iter().map(|x| x * x).sum::<f64>().sqrt();
            let same = norm(self.rel_off[k]..self.rel_off[k + 1]);
            let other = (0..4).filter(|&j| j != k).map(|j| norm(self.rel_off[j]..self.rel_off[j + 1])).fold(0.0, f64::max);
            if same > 0.0 {
                worst = worst.max(other / same);
            }
        }
        worst
    }

    fn dense_block(&self, a: &Csr, rk: usize, ck: usize) -> DMatrix<f64> {
        let (r0, r1) = (self.rel_off[rk], self.rel_off[rk + 1]);
        let (c0, c1) = (self.rel_off[ck], self.rel_off[ck + 1]);
        let mut m = DMatrix::zeros(r1 - r0, c1 - c0);
        for (i, j, &v) in a.triplet_iter() {
            if (r0..r1).contains(&i) && (c0..c1).contains(&j) {
                m[(i - r0, j - c0)] += v;
            }
        }
        m
    }

    /// Per-degree spectra of the G-symmetrized `-D^2` (dense).
    fn degree_spectra(&self) -> Result<Vec<(DMatrix<f64>, Spectrum)>, CoreError> {
        let sizes = self.relative_sizes();
        let mut chol = Vec::with_capacity(4);
        for k in 0..4 {
            let g = self.dense_block(&self.g_ii, k, k);
            let l = if sizes[k] == 0 {
                DMatrix::zeros(0, 0)
            } else {
                g.cholesky().ok_or_else(|| CoreError::Solver(format!("degree-{k} mass block is not positive definite")))?.l()
            };
            chol.push(l);
        }
        // S_{j,k} = L_j^{-1} K_{jk} L_k^{-T}
        let scaled = |j: usize, k: usize| -> DMatrix<f64> {
            let kjk = self.dense_block(&self.k_ii, j, k);
            if sizes[j] == 0 || sizes[k] == 0 {
                return DMatrix::zeros(sizes[j], sizes[k]);
            }
            let a = chol[j].solve_lower_triangular(&kjk).expect("nonsingular factor");
            let at = chol[k].solve_lower_triangular(&a.transpose()).expect("nonsingular factor");
            at.transpose()
        };
        let mut out = Vec::with_capacity(4);
        for k in 0..4 {
            let mut b = DMatrix::zeros(sizes[k], sizes[k]);
            if k > 0 {
                let s = scaled(k - 1, k);
                b += s.transpose() * s;
            }
            if k < 3 {
                let s = scaled(k + 1, k);
                b += s.transpose() * s;
            }
            let b = (&b + b.transpose()) * 0.5;
            let spec = if sizes[k] == 0 {
                Spectrum { eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(0, 0) }
            } else {
                let e = SymmetricEigen::new(b);
                Spectrum { eigenvalues: e.eigenvalues.as_slice().to_vec(), eigenvectors: e.eigenvectors }
            };
            out.push((chol[k].clone(), spec));
        }
        Ok(out)
    }

    /// Discrete harmonic fields: eigenvectors of `-D^2` with eigenvalue below
    /// `tol` times the largest one.  Fails when no 10x gap separates them.
    pub fn harmonic_kernel(&self, tol: f64) -> Result<HarmonicBasis, CoreError> {
        let spectra = self.degree_spectra()?;
        let scale = spectra.iter().flat_map(|(_, e)| e.eigenvalues.iter().copied()).fold(0.0f64, f64::max);
        let threshold = (tol * scale).max(f64::MIN_POSITIVE);
        let sizes = self.relative_sizes();
        let mut fields: [Vec<CochainState>; 4] = Default::default();
        let mut ladder: [Vec<f64>; 4] = Default::default();
        for (k, (l, eig)) in spectra.iter().enumerate() {
            let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            ladder[k] = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let kept: Vec<usize> = order.iter().copied().filter(|&i| eig.eigenvalues[i] < threshold).collect();
            if let (Some(&last), Some(&next)) = (kept.last(), order.get(kept.len())) {
                let inside = eig.eigenvalues[last].abs().max(f64::EPSILON * scale);
                if eig.eigenvalues[next] < KERNEL_GAP * inside {
                    return Err(CoreError::AmbiguousKernel { ladder: ladder[k].clone() });
                }
            }
            for i in kept {
                let y = eig.eigenvectors.column(i).into_owned();
                let x = l.transpose().solve_upper_triangular(&y).expect("nonsingular factor");
                fields[k].push(CochainState::degree(k, x.as_slice().to_vec(), sizes, true));
            }
        }
        Ok(HarmonicBasis { fields, ladder, threshold })
    }

    pub fn harmonic_dims(&self, tol: f64) -> Result<[usize; 4], CoreError> {
        Ok(self.harmonic_kernel(tol)?.dims())
    }

    /// Smallest nonzero `|lambda|` of `D`; infinite when `D` has no nonzero modes.
    pub fn spectral_gap(&self) -> Result<f64, CoreError> {
        let h = self.harmonic_kernel(DEFAULT_KERNEL_TOL)?;
        let min = (0..4)
            .flat_map(|k| h.ladder[k].iter().skip(h.fields[k].len()).copied())
            .fold(f64::INFINITY, f64::min);
        Ok(min.sqrt())
    }

    /// Largest `|lambda|` of `D`.
    pub fn spectral_radius(&self) -> Result<f64, CoreError> {
        let s = self.degree_spectra()?;
        Ok(s.iter().flat_map(|(_, e)| e.eigenvalues.iter().copied()).fold(0.0f64, f64::max).sqrt())
    }

    /// `degree,index,eigenvalue,kernel` rows.
    pub fn eigen_ladder_csv(&self, tol: f64) -> Result<String, CoreError> {
        let h = self.harmonic_kernel(tol)?;
        let mut s = String::from("degree,index,eigenvalue,kernel\n");
        for k in 0..4 {
            for (i, v) in h.ladder[k].iter().enumerate() {
                let _ = writeln!(s, "{k},{i},{v:e},{}", i < h.fields[k].len());
            }
        }
        Ok(s)
    }

    /// `(|d x|, |delta x|)` relative to `|x|`, per degree part, in the G norm.
    pub fn harmonic_residuals(&self, x: &CochainState) -> (f64, f64) {
        let mut dn: f64 = 0.0;
        let mut cn: f64 = 0.0;
        for k in 0..4 {
            let full = self.op.full_part(x, k);
            let nx = self.op.inner(k, &full, &full).sqrt();
            if nx == 0.0 {
                continue;
            }
            if k < 3 {
                let dx = self.op.apply_d(k, &full);
                dn = dn.max(self.op.inner(k + 1, &dx, &dx).sqrt() / nx);
            }
            if k > 0 {
                let cx = self.op.codifferential_relative(k, &full);
                cn = cn.max(self.op.inner(k - 1, &cx, &cx).sqrt() / nx);
            }
        }
        (dn, cn)
    }
}

/// Hex SHA-256 over the mesh, the patch and the materials.
pub fn fingerprint(c: &SimplicialComplex3, mat: &MaterialField) -> String {
    let mut h = Sha256::new();
    for v in c.vertices() {
        for x in v {
            h.update(x.to_le_bytes());
        }
    }
    for t in c.tets() {
        for &i in t {
            h.update((i as u64).to_le_bytes());
        }
    }
    for &f in c.gamma() {
        for &i in &c.faces()[f] {
            h.update((i as u64).to_le_bytes());
        }
    }
    h.update(mat.bytes());
    hex::encode(h.finalize())
}
