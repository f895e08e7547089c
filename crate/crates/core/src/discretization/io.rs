//! Nodal field output.

use std::fmt::Write as _;

use super::Mesh;

/// `nodeId,x,y,psi,T` rows for an interleaved two-equation solution.
pub fn solution_csv(mesh: &Mesh, x: &[f64]) -> String {
    assert_eq!(x.len(), 2 * mesh.num_nodes(), "solution length");
    let mut s = String::from("nodeId,x,y,psi,T\n");
    for (n, c) in mesh.coords().iter().enumerate() {
        let _ = writeln!(
            s,
            "{n},{:.17e},{:.17e},{:.17e},{:.17e}",
            c[0],
            c[1],
            x[2 * n],
            x[2 * n + 1]
        );
    }
    s
}

/// Legacy VTK ASCII unstructured grid with `psi` and `T` point data and the region as cell data.
pub fn solution_vtk(mesh: &Mesh, x: &[f64], title: &str) -> String {
    assert_eq!(x.len(), 2 * mesh.num_nodes(), "solution length");
    let n = mesh.num_nodes();
    let ne = mesh.num_elements();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID"
    );
    let _ = writeln!(s, "POINTS {n} double");
    for c in mesh.coords() {
        let _ = writeln!(s, "{:.17e} {:.17e} 0", c[0], c[1]);
    }
    let _ = writeln!(s, "CELLS {ne} {}", 5 * ne);
    for el in mesh.elements() {
        let _ = writeln!(s, "4 {} {} {} {}", el[0], el[1], el[2], el[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("9\n");
    }
    let _ = writeln!(
        s,
        "CELL_DATA {ne}\nSCALARS region int 1\nLOOKUP_TABLE default"
    );
    for r in mesh.regions() {
        let _ = writeln!(s, "{}", *r as usize);
    }
    let _ = writeln!(s, "POINT_DATA {n}");
    for (name, eq) in [("psi", 0), ("T", 1)] {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for k in 0..n {
            let _ = writeln!(s, "{:.17e}", x[2 * k + eq]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Region;

    #[test]
    fn csv_and_vtk_shapes() {
        let m = Mesh::rectangle(1.0, 1.0, 1, 1, Region::Slider).unwrap();
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let csv = solution_csv(&m, &x);
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().nth(2).unwrap().starts_with("1,1.0"));
        let vtk = solution_vtk(&m, &x, "t");
        assert!(vtk.contains("POINTS 4 double"));
        assert!(vtk.contains("CELLS 1 5"));
        assert!(vtk.contains("SCALARS T double 1"));
    }
}
