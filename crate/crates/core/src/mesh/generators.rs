use std::collections::HashMap;

use super::{tet_volume, SimplicialComplex3};
use crate::CoreError;

/// Largest tetrahedron count any generator will produce.
pub const SIMPLEX_BUDGET: usize = 1_000_000;

fn orient(x: &[[f64; 3]], tets: Vec<[usize; 4]>) -> Vec<[usize; 4]> {
    tets.into_iter()
        .map(|mut t| {
            if tet_volume(x, &t) < 0.0 {
                t.swap(0, 1);
            }
            t
        })
        .collect()
}

pub fn build_single_tet() -> SimplicialComplex3 {
    let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    SimplicialComplex3::new(v, vec![[0, 1, 2, 3]]).expect("unit tetrahedron is valid")
}

/// Uniform 1:8 subdivision: four corner tets plus the inner octahedron cut
/// along one of its diagonals.
pub fn refine(c: &SimplicialComplex3) -> Result<SimplicialComplex3, CoreError> {
    let requested = 8 * c.tets().len();
    if requested > SIMPLEX_BUDGET {
        return Err(CoreError::Budget { requested, limit: SIMPLEX_BUDGET });
    }
    let mut x = c.vertices().to_vec();
    let mut mid: HashMap<[usize; 2], usize> = HashMap::new();
    let mut m = |i: usize, j: usize, x: &mut Vec<[f64; 3]>| -> usize {
        let key = if i < j { [i, j] } else { [j, i] };
        *mid.entry(key).or_insert_with(|| {
            let (a, b) = (x[i], x[j]);
            x.push([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0]);
            x.len() - 1
        })
    };
    let mut out = Vec::with_capacity(requested);
    for &[x0, x1, x2, x3] in c.tets() {
        let m01 = m(x0, x1, &mut x);
        let m02 = m(x0, x2, &mut x);
        let m03 = m(x0, x3, &mut x);
        let m12 = m(x1, x2, &mut x);
        let m13 = m(x1, x3, &mut x);
        let m23 = m(x2, x3, &mut x);
        out.extend_from_slice(&[
            [x0, m01, m02, m03],
            [m01, x1, m12, m13],
            [m02, m12, x2, m23],
            [m03, m13, m23, x3],
            [m01, m02, m03, m13],
            [m01, m02, m12, m13],
            [m02, m03, m13, m23],
            [m02, m12, m13, m23],
        ]);
    }
    let tets = orient(&x, out);
    SimplicialComplex3::new(x, tets)
}

pub fn build_ball(refinement: usize) -> Result<SimplicialComplex3, CoreError> {
    let requested = 8usize.checked_pow(refinement as u32).unwrap_or(usize::MAX);
    if requested > SIMPLEX_BUDGET {
        return Err(CoreError::Budget { requested, limit: SIMPLEX_BUDGET });
    }
    let mut c = build_single_tet();
    for _ in 0..refinement {
        c = refine(&c)?;
    }
    Ok(c)
}

/// Splits the prism `a0 a1 a2 / b0 b1 b2` into three tets so that every quad
/// face is cut by the diagonal through its smallest vertex; neighbouring
/// prisms then agree on shared quads.
fn split_prism(a: [usize; 3], b: [usize; 3]) -> Vec<[usize; 4]> {
    let verts = [a[0], a[1], a[2], b[0], b[1], b[2]];
    let (mut k, _) = verts.iter().enumerate().min_by_key(|(_, &v)| v).unwrap();
    let (mut a, mut b) = (a, b);
    if k >= 3 {
        std::mem::swap(&mut a, &mut b);
        k -= 3;
    }
    a.rotate_left(k);
    b.rotate_left(k);
    if a[1].min(b[2]) < a[2].min(b[1]) {
        vec![[a[0], a[1], a[2], b[2]], [a[0], a[1], b[1], b[2]], [a[0], b[0], b[1], b[2]]]
    } else {
        vec![[a[0], a[1], a[2], b[1]], [a[0], a[2], b[1], b[2]], [a[0], b[0], b[1], b[2]]]
    }
}

pub fn build_solid_torus(n_segments: usize) -> Result<SimplicialComplex3, CoreError> {
    build_solid_torus_with(n_segments, 3.0, 1.0)
}

/// Ring of `n` triangular prisms around the z axis: major radius `big`,
/// cross-section a triangle inscribed in a circle of radius `small`.
pub fn build_solid_torus_with(n: usize, big: f64, small: f64) -> Result<SimplicialComplex3, CoreError> {
    if n < 3 {
        return Err(CoreError::Construction(format!("a prism ring needs at least 3 segments, got {n}")));
    }
    if !(big > small && small > 0.0) {
        return Err(CoreError::Geometry("torus radii must satisfy big > small > 0".into()));
    }
    let mut x = Vec::with_capacity(3 * n);
    for i in 0..n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        for j in 0..3 {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
            let rho = big + small * ph.cos();
            x.push([rho * th.cos(), rho * th.sin(), small * ph.sin()]);
        }
    }
    let mut tets = Vec::with_capacity(3 * n);
    for i in 0..n {
        let a = [3 * i, 3 * i + 1, 3 * i + 2];
        let j = (i + 1) % n;
        let b = [3 * j, 3 * j + 1, 3 * j + 2];
        tets.extend(split_prism(a, b));
    }
    let tets = orient(&x, tets);
    let c = SimplicialComplex3::new(x, tets)?;
    if c.boundary_faces().len() != 6 * n {
        return Err(CoreError::Construction(format!(
            "prism diagonals do not match: {} boundary faces instead of {}",
            c.boundary_faces().len(),
            6 * n
        )));
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TunnelStyle {
    /// Straight square holes drilled through the slab: a handlebody of genus k.
    Through,
    /// Closed rectangular voxel loops buried inside the box: k solid tori
    /// removed from the interior, leaving k torus-shaped cavities.
    Cavity,
}

pub fn build_tunneled_box(k: usize, resolution: usize) -> Result<SimplicialComplex3, CoreError> {
    build_tunneled_box_with(k, resolution, TunnelStyle::Through)
}

/// Box of unit cubes, each cut into 6 tets along its main diagonal, with `k`
/// tunnels removed.  `resolution` is the tunnel width in voxels; tunnels are
/// separated from each other and from the outer faces they do not pierce by
/// the same width.
pub fn build_tunneled_box_with(k: usize, resolution: usize, style: TunnelStyle) -> Result<SimplicialComplex3, CoreError> {
    let r = resolution;
    if r == 0 {
        return Err(CoreError::Geometry("resolution must be at least one voxel".into()));
    }
    let (nx, ny, nz) = match style {
        TunnelStyle::Through => ((2 * k + 1) * r, 3 * r, r),
        TunnelStyle::Cavity => ((4 * k + 1) * r, 5 * r, 3 * r),
    };
    let requested = 6 * nx * ny * nz;
    if requested > SIMPLEX_BUDGET {
        return Err(CoreError::Budget { requested, limit: SIMPLEX_BUDGET });
    }
    let removed = |i: usize, j: usize, l: usize| -> bool {
        match style {
            TunnelStyle::Through => {
                let in_y = (r..2 * r).contains(&j);
                (0..k).any(|t| in_y && ((2 * t + 1) * r..(2 * t + 2) * r).contains(&i))
            }
            TunnelStyle::Cavity => {
                if !(r..2 * r).contains(&l) {
                    return false;
                }
                (0..k).any(|t| {
                    let x0 = r + 4 * t * r;
                    let outer = (x0..x0 + 3 * r).contains(&i) && (r..4 * r).contains(&j);
                    let hole = (x0 + r..x0 + 2 * r).contains(&i) && (2 * r..3 * r).contains(&j);
                    outer && !hole
                })
            }
        }
    };
    let vid = |i: usize, j: usize, l: usize| (l * (ny + 1) + j) * (nx + 1) + i;
    let mut tets = Vec::new();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    for l in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if removed(i, j, l) {
                    continue;
                }
                for p in perms {
                    let mut c = [i, j, l];
                    let mut t = [vid(c[0], c[1], c[2]), 0, 0, 0];
                    for (s, &axis) in p.iter().enumerate() {
                        c[axis] += 1;
                        t[s + 1] = vid(c[0], c[1], c[2]);
                    }
                    tets.push(t);
                }
            }
        }
    }
    let mut remap = HashMap::new();
    let mut x = Vec::new();
    for t in &mut tets {
        for v in t.iter_mut() {
            let id = *v;
            *v = *remap.entry(id).or_insert_with(|| {
                let i = id % (nx + 1);
                let j = (id / (nx + 1)) % (ny + 1);
                let l = id / ((nx + 1) * (ny + 1));
                x.push([i as f64, j as f64, l as f64]);
                x.len() - 1
            });
        }
    }
    let tets = orient(&x, tets);
    SimplicialComplex3::new(x, tets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_three_segments() {
        let c = build_solid_torus(3).unwrap();
        assert_eq!(c.counts(), [9, 27, 27, 9]);
        assert_eq!(c.euler(), 0);
        assert_eq!(c.boundary_euler(), 0);
    }

    #[test]
    fn torus_needs_three_segments() {
        assert!(matches!(build_solid_torus(2), Err(CoreError::Construction(_))));
    }

    #[test]
    fn ball_refinement_multiplies_tets() {
        let b0 = build_ball(0).unwrap();
        assert_eq!(b0.counts(), build_single_tet().counts());
        let b1 = build_ball(1).unwrap();
        assert_eq!(b1.tets().len(), 8);
        assert_eq!(b1.counts(), [10, 25, 24, 8]);
        assert_eq!(b1.euler(), 1);
    }

    #[test]
    fn ball_budget() {
        assert!(matches!(build_ball(12), Err(CoreError::Budget { .. })));
    }

    #[test]
    fn refinement_keeps_positive_volumes() {
        let c = refine(&build_solid_torus(4).unwrap()).unwrap();
        assert!((0..c.tets().len()).all(|t| c.volume(t) > 0.0));
        assert_eq!(c.tets().len(), 8 * 12);
    }

    #[test]
    fn tunneled_box_sizes() {
        let b = build_tunneled_box(1, 1).unwrap();
        assert_eq!(b.tets().len(), 6 * 8);
        assert_eq!(b.euler(), 0);
        let b2 = build_tunneled_box(2, 1).unwrap();
        assert_eq!(b2.tets().len(), 6 * 13);
        assert_eq!(b2.euler(), -1);
        assert_eq!(b2.boundary_euler(), -2);
        assert!(build_tunneled_box(1, 0).is_err());
    }

    #[test]
    fn cavity_box_has_two_boundary_components() {
        let b = build_tunneled_box_with(1, 1, TunnelStyle::Cavity).unwrap();
        // sphere plus torus
        assert_eq!(b.boundary_euler(), 2);
        assert_eq!(b.euler(), 1);
    }
}
