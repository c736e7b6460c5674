use serde::{Deserialize, Serialize};

use super::{RobinBc, SLProblem, SlError};
use crate::grid::Grid;
use crate::profile::Profile;
use crate::quadrature::GaussLegendre;

/// `−(1/r)(p u′)′ + (q/r) u` with Robin conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSLProblem {
    pub p: Profile,
    pub r: Profile,
    pub q: Profile,
    pub bc: RobinBc,
}

/// Monotone map x ↦ ξ on [0, 1] with the amplitude factor (r p)^{1/4}.
#[derive(Clone, Debug)]
pub struct CoordinateMap {
    grid: Grid,
    xi: Vec<f64>,
    amplitude: Vec<f64>,
}

impl CoordinateMap {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// ξ at the x-grid nodes.
    pub fn xi_samples(&self) -> &[f64] {
        &self.xi
    }

    pub fn amplitude_samples(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn forward(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.xi, x)
    }

    pub fn amplitude(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.amplitude, x)
    }

    pub fn inverse(&self, xi: f64) -> f64 {
        let xi = xi.clamp(0.0, 1.0);
        let k = self.xi.partition_point(|v| *v < xi).clamp(1, self.xi.len() - 1);
        let (a, b) = (self.xi[k - 1], self.xi[k]);
        let t = if b > a { (xi - a) / (b - a) } else { 0.0 };
        self.grid.x(k - 1) + t * self.grid.dx()
    }
}

/// Reduce a variable-coefficient problem to constant diffusion ε on a
/// uniform ξ grid with `nodes` points.
pub fn liouville_transform(g: &GeneralSLProblem, nodes: usize) -> Result<(SLProblem, CoordinateMap), SlError> {
    let grid = Grid::new(nodes);
    let pmin = g.p.min_on(&grid)?;
    let rmin = g.r.min_on(&grid)?;
    if pmin <= 0.0 {
        return Err(SlError::NonPositiveCoefficient(format!("min p = {pmin}")));
    }
    if rmin <= 0.0 {
        return Err(SlError::NonPositiveCoefficient(format!("min r = {rmin}")));
    }

    let speed = |x: f64| (g.r.eval(x) / g.p.eval(x)).sqrt();
    let mut cumulative = vec![0.0; nodes];
    if g.p.is_closed_form() && g.r.is_closed_form() {
        let rule = GaussLegendre::new(5, nodes - 1);
        for (i, v) in rule.panel_integrals(5, speed).into_iter().enumerate() {
            cumulative[i + 1] = cumulative[i] + v;
        }
    } else {
        let s: Vec<f64> = grid.sample(speed);
        cumulative = grid.cumulative(&s);
    }
    let total = cumulative[nodes - 1];
    let eps = total.powi(-2);
    let xi: Vec<f64> = cumulative.iter().map(|c| c / total).collect();
    let amplitude = grid.sample(|x| (g.r.eval(x) * g.p.eval(x)).powf(0.25));
    let map = CoordinateMap { grid: grid.clone(), xi, amplitude };

    // m = (rp)^{1/4}, derivatives in x, then converted to ξ.
    let m_data = |x: f64| {
        let (p, p1, p2) = g.p.eval3(x);
        let (r, r1, r2) = g.r.eval3(x);
        let s = r * p;
        let s1 = r1 * p + r * p1;
        let s2 = r2 * p + 2.0 * r1 * p1 + r * p2;
        let m = s.powf(0.25);
        let mx = 0.25 * s.powf(-0.75) * s1;
        let mxx = 0.25 * (-0.75 * s.powf(-1.75) * s1 * s1 + s.powf(-0.75) * s2);
        let z = r / p;
        let z1 = (r1 * p - r * p1) / (p * p);
        let gx = eps.sqrt() * z.sqrt();
        let gxx = eps.sqrt() * 0.5 * z1 / z.sqrt();
        (m, mx, mxx, gx, gxx, r)
    };
    let q_of_x = |x: f64| {
        let (m, mx, mxx, gx, gxx, r) = m_data(x);
        let m_xixi = (mxx * gx - mx * gxx) / gx.powi(3);
        g.q.eval(x) / r + eps * m_xixi / m
    };
    let q_new: Vec<f64> = grid.points().iter().map(|&xi| q_of_x(map.inverse(xi))).collect();

    let end = |x: f64, a: f64, b: f64| {
        let (m, mx, _, gx, _, _) = m_data(x);
        (a - b * mx / m, b * gx)
    };
    let (a0, b0) = end(0.0, g.bc.a0, g.bc.b0);
    let (a1, b1) = end(1.0, g.bc.a1, g.bc.b1);
    let q_profile = match q_new.first() {
        Some(&first) if q_new.iter().all(|v| (v - first).abs() <= 1e-14 * (1.0 + first.abs())) => {
            Profile::constant(first)
        }
        _ => Profile::Sampled { values: q_new },
    };
    let problem = SLProblem::new(eps, q_profile, RobinBc { a0, b0, a1, b1 })?;
    Ok((problem, map))
}

#[cfg(test)]
mod tests {
    use super::super::numeric_eigensystem;
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};

    fn general(p: Profile, r: Profile, q: Profile, bc: RobinBc) -> GeneralSLProblem {
        GeneralSLProblem { p, r, q, bc }
    }

    #[test]
    fn identity_for_constant_coefficients() {
        let g = general(Profile::constant(1.0), Profile::constant(1.0), Profile::constant(2.0), RobinBc::NEUMANN_NEUMANN);
        let (pr, map) = liouville_transform(&g, 101).unwrap();
        assert!((pr.p - 1.0).abs() < 1e-14);
        assert_eq!(pr.q.as_constant(), Some(2.0));
        for (i, xi) in map.xi_samples().iter().enumerate() {
            assert!((xi - map.grid().x(i)).abs() < 1e-14);
        }
        assert!(map.amplitude_samples().iter().all(|a| (a - 1.0).abs() < 1e-15));
        assert!((pr.bc.b0 - 1.0).abs() < 1e-14 && (pr.bc.b1 - 1.0).abs() < 1e-14);
        assert!(pr.bc.a0 == 0.0 && pr.bc.a1 == 0.0);
    }

    #[test]
    fn constant_diffusion_four() {
        let g = general(Profile::constant(4.0), Profile::constant(1.0), Profile::zero(), RobinBc::NEUMANN_DIRICHLET);
        let (pr, map) = liouville_transform(&g, 101).unwrap();
        assert!((pr.p - 4.0).abs() < 1e-13);
        assert!((map.forward(0.37) - 0.37).abs() < 1e-13);
        assert!(map.amplitude_samples().iter().all(|a| (a - 2f64.sqrt()).abs() < 1e-14));
    }

    #[test]
    fn map_is_monotone_and_invertible() {
        let g = general(
            Profile::polynomial(vec![1.0, 1.0]),
            Profile::polynomial(vec![2.0, 0.0, -1.0]),
            Profile::zero(),
            RobinBc::DIRICHLET_DIRICHLET,
        );
        let (_, map) = liouville_transform(&g, 201).unwrap();
        let xi = map.xi_samples();
        assert_eq!(xi[0], 0.0);
        assert!((xi[200] - 1.0).abs() < 1e-15);
        assert!(xi.windows(2).all(|w| w[1] > w[0]));
        for x in [0.1, 0.5, 0.93] {
            assert!((map.inverse(map.forward(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_positive_coefficients() {
        let g = general(Profile::polynomial(vec![-0.1, 1.0]), Profile::constant(1.0), Profile::zero(), RobinBc::NEUMANN_NEUMANN);
        assert!(matches!(liouville_transform(&g, 51), Err(SlError::NonPositiveCoefficient(_))));
    }

    // Conservative finite differences of the general operator (Dirichlet),
    // symmetrised with the weight r.
    fn direct_eigenvalues(g: &GeneralSLProblem, nodes: usize, count: usize) -> Vec<f64> {
        let grid = Grid::new(nodes);
        let dx = grid.dx();
        let n = nodes - 2;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let x = grid.x(k + 1);
            let pl = g.p.eval(x - 0.5 * dx);
            let pr = g.p.eval(x + 0.5 * dx);
            let r = g.r.eval(x);
            a[(k, k)] = ((pl + pr) / (dx * dx) + g.q.eval(x)) / r;
            if k + 1 < n {
                let r2 = g.r.eval(grid.x(k + 2));
                a[(k, k + 1)] = -pr / (dx * dx) / (r * r2).sqrt();
                a[(k + 1, k)] = a[(k, k + 1)];
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.truncate(count);
        ev
    }

    #[test]
    fn eigenvalues_agree_with_direct_discretisation() {
        let g = general(
            Profile::polynomial(vec![1.0, 0.5]),
            Profile::Trig { terms: vec![crate::profile::TrigTerm { cos: 0.3, sin: 0.0, freq: 2.0 }, crate::profile::TrigTerm { cos: 1.0, sin: 0.0, freq: 0.0 }] },
            Profile::polynomial(vec![0.5, 0.0, 1.0]),
            RobinBc::DIRICHLET_DIRICHLET,
        );
        let oracle = direct_eigenvalues(&g, 401, 4);
        let (pr, _) = liouville_transform(&g, 801).unwrap();
        let basis = numeric_eigensystem(&pr, 4, 801).unwrap();
        for n in 1..=4 {
            let rel = (basis.lambda(n) - oracle[n - 1]).abs() / oracle[n - 1];
            assert!(rel < 1e-3, "n={n}: {} vs {}", basis.lambda(n), oracle[n - 1]);
        }
    }
}
