//! Basis CSV: `#` metadata lines (eigenvalues, endpoint derivatives), a
//! header `x,phi_1,…,phi_J`, then one row per grid node.

use std::io::{BufRead, Write};

use super::{SlError, SpectralBasis};
use crate::grid::Grid;

fn join(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",")
}

pub fn write_basis_csv(basis: &SpectralBasis, mut out: impl Write) -> std::io::Result<()> {
    let j = basis.len();
    writeln!(out, "# eigenvalues,{}", join(basis.eigenvalues().iter().copied()))?;
    writeln!(out, "# dphi_at_0,{}", join((1..=j).map(|n| basis.endpoint_derivatives(n).0)))?;
    writeln!(out, "# dphi_at_1,{}", join((1..=j).map(|n| basis.endpoint_derivatives(n).1)))?;
    let header: Vec<String> = std::iter::once("x".to_string()).chain((1..=j).map(|n| format!("phi_{n}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    let grid = basis.grid();
    for i in 0..grid.nodes() {
        let row = std::iter::once(grid.x(i)).chain((1..=j).map(|n| basis.mode(n)[i]));
        writeln!(out, "{}", join(row))?;
    }
    Ok(())
}

fn parse_list(line: &str, key: &str) -> Result<Vec<f64>, SlError> {
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|l| l.strip_prefix(key))
        .ok_or_else(|| SlError::Io(format!("expected metadata line `{key}`")))?;
    rest.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|e| SlError::Io(format!("{key}: {e}"))))
        .collect()
}

/// Reads a basis written by [`write_basis_csv`]. The result carries grid
/// samples only (no closed forms).
pub fn read_basis_csv(input: impl BufRead) -> Result<SpectralBasis, SlError> {
    let mut lines = input.lines().map(|l| l.map_err(|e| SlError::Io(e.to_string())));
    let mut next = || lines.next().unwrap_or_else(|| Err(SlError::Io("unexpected end of file".into())));
    let eigenvalues = parse_list(&next()?, "eigenvalues")?;
    let d0 = parse_list(&next()?, "dphi_at_0")?;
    let d1 = parse_list(&next()?, "dphi_at_1")?;
    let j = eigenvalues.len();
    if d0.len() != j || d1.len() != j {
        return Err(SlError::Io("metadata lengths disagree".into()));
    }
    let header = next()?;
    if header.split(',').count() != j + 1 {
        return Err(SlError::Io("header does not match the number of eigenvalues".into()));
    }
    let mut modes = vec![Vec::new(); j];
    let mut rows = 0;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| SlError::Io(format!("row {rows}: {e}"))))
            .collect::<Result<_, _>>()?;
        if vals.len() != j + 1 {
            return Err(SlError::Io(format!("row {rows} has {} columns", vals.len())));
        }
        for (m, v) in modes.iter_mut().zip(&vals[1..]) {
            m.push(*v);
        }
        rows += 1;
    }
    if rows < 3 {
        return Err(SlError::Io("basis needs at least 3 grid rows".into()));
    }
    if eigenvalues.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SlError::Io("eigenvalues are not strictly increasing".into()));
    }
    let derivs = d0.into_iter().zip(d1).collect();
    Ok(SpectralBasis::from_parts(eigenvalues, Grid::new(rows), modes, derivs, None))
}

#[cfg(test)]
mod tests {
    use super::super::{analytic_eigensystem, RobinBc, SLProblem};
    use super::*;
    use crate::profile::Profile;

    #[test]
    fn round_trip_is_exact() {
        let pr = SLProblem::new(0.7, Profile::constant(1.0), RobinBc::NEUMANN_DIRICHLET).unwrap();
        let basis = analytic_eigensystem(&pr, 5, &Grid::new(41)).unwrap();
        let mut buf = Vec::new();
        write_basis_csv(&basis, &mut buf).unwrap();
        let back = read_basis_csv(buf.as_slice()).unwrap();
        assert_eq!(back.eigenvalues(), basis.eigenvalues());
        for n in 1..=5 {
            assert_eq!(back.mode(n), basis.mode(n));
            assert_eq!(back.endpoint_derivatives(n), basis.endpoint_derivatives(n));
        }
    }

    #[test]
    fn malformed_input() {
        assert!(read_basis_csv("x,phi_1\n0,1\n".as_bytes()).is_err());
    }
}
