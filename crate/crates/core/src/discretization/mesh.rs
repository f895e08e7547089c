use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{BasisSet, DiscretizationError};

/// Material region of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Conductor,
    Pad,
    Slider,
}

impl Region {
    pub const ALL: [Region; 3] = [Region::Conductor, Region::Pad, Region::Slider];

    pub fn name(self) -> &'static str {
        match self {
            Region::Conductor => "conductor",
            Region::Pad => "pad",
            Region::Slider => "slider",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = DiscretizationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Region::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| DiscretizationError::Format(format!("unknown region {s}")))
    }
}

/// Half-domain strip: half of the slider from the symmetry plane at `x = 0`,
/// then the contact pad, then the conductor whose far end is at the right.
#[derive(Debug, Clone, PartialEq)]
pub struct SliderGeometry {
    pub conductor_length: f64,
    pub pad_length: f64,
    pub slider_half_length: f64,
    pub height: f64,
    pub nx_conductor: usize,
    pub nx_pad: usize,
    pub nx_slider: usize,
    pub ny: usize,
}

impl Default for SliderGeometry {
    fn default() -> Self {
        SliderGeometry {
            conductor_length: 1.0,
            pad_length: 0.1,
            slider_half_length: 0.5,
            height: 1.0,
            nx_conductor: 8,
            nx_pad: 2,
            nx_slider: 6,
            ny: 16,
        }
    }
}

impl SliderGeometry {
    pub fn total_length(&self) -> f64 {
        self.conductor_length + self.pad_length + self.slider_half_length
    }

    /// x of the slider / pad interface.
    pub fn slider_end(&self) -> f64 {
        self.slider_half_length
    }
}

/// Structured-grid bookkeeping kept for morphing.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInfo {
    /// Element columns and rows.
    pub nx: usize,
    pub ny: usize,
    /// Node columns of the slider, symmetry plane first.
    pub slider_columns: std::ops::RangeInclusive<usize>,
    pub slider_half_length: f64,
    pub height: f64,
}

impl GridInfo {
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    /// Axial coordinate on the full slider, in `[0, 1/2]` on the modelled
    /// half: 0 at the pad, 1/2 on the symmetry plane.
    pub fn slider_t(&self, x: f64) -> f64 {
        (self.slider_half_length - x) / (2.0 * self.slider_half_length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    coords: Vec<[f64; 2]>,
    elements: Vec<[usize; 4]>,
    regions: Vec<Region>,
    node_sets: BTreeMap<String, Vec<usize>>,
    grid: Option<GridInfo>,
}

impl Mesh {
    pub fn new(
        coords: Vec<[f64; 2]>,
        elements: Vec<[usize; 4]>,
        regions: Vec<Region>,
        node_sets: BTreeMap<String, Vec<usize>>,
    ) -> Result<Mesh, DiscretizationError> {
        if regions.len() != elements.len() {
            return Err(DiscretizationError::Format(format!(
                "{} elements but {} region tags",
                elements.len(),
                regions.len()
            )));
        }
        let n = coords.len();
        if let Some(e) = elements.iter().position(|el| el.iter().any(|&v| v >= n)) {
            return Err(DiscretizationError::Format(format!(
                "element {e} references a missing node"
            )));
        }
        if let Some((name, _)) = node_sets
            .iter()
            .find(|(_, ids)| ids.iter().any(|&v| v >= n))
        {
            return Err(DiscretizationError::Format(format!(
                "node set {name} references a missing node"
            )));
        }
        let mesh = Mesh {
            coords,
            elements,
            regions,
            node_sets,
            grid: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// `nx` by `ny` elements on `[0,lx] x [0,ly]`, all in one region.
    pub fn rectangle(
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
        region: Region,
    ) -> Result<Mesh, DiscretizationError> {
        if !(lx > 0.0 && ly > 0.0) {
            return Err(DiscretizationError::Degenerate(format!(
                "rectangle {lx} x {ly}"
            )));
        }
        if nx == 0 || ny == 0 {
            return Err(DiscretizationError::Degenerate("zero element count".into()));
        }
        let xs: Vec<f64> = (0..=nx).map(|i| lx * i as f64 / nx as f64).collect();
        let ys: Vec<f64> = (0..=ny).map(|j| ly * j as f64 / ny as f64).collect();
        let (coords, node) = grid_nodes(&xs, &ys);
        let mut elements = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                elements.push(quad(&node, i, j));
            }
        }
        let regions = vec![region; elements.len()];
        let mut mesh = Mesh {
            coords,
            elements,
            regions,
            node_sets: BTreeMap::new(),
            grid: None,
        };
        mesh.add_side_sets(nx, ny);
        mesh.validate()?;
        Ok(mesh)
    }

    /// The conductor / pad / half-slider strip. Elements are numbered region
    /// by region so every workset can be region-homogeneous.
    pub fn slider(g: &SliderGeometry) -> Result<Mesh, DiscretizationError> {
        let lengths = [
            g.conductor_length,
            g.pad_length,
            g.slider_half_length,
            g.height,
        ];
        if lengths.iter().any(|&l| !(l > 0.0)) {
            return Err(DiscretizationError::Degenerate(format!(
                "non-positive length in {lengths:?}"
            )));
        }
        let counts = [g.nx_conductor, g.nx_pad, g.nx_slider, g.ny];
        if counts.contains(&0) {
            return Err(DiscretizationError::Degenerate("zero element count".into()));
        }
        let mut xs = Vec::new();
        let mut x0 = 0.0;
        for (len, n) in [
            (g.slider_half_length, g.nx_slider),
            (g.pad_length, g.nx_pad),
            (g.conductor_length, g.nx_conductor),
        ] {
            for i in 0..n {
                xs.push(x0 + len * i as f64 / n as f64);
            }
            x0 += len;
        }
        xs.push(g.total_length());
        let ys: Vec<f64> = (0..=g.ny)
            .map(|j| g.height * j as f64 / g.ny as f64)
            .collect();
        let (coords, node) = grid_nodes(&xs, &ys);
        let nx = xs.len() - 1;
        let pad0 = g.nx_slider;
        let cond0 = g.nx_slider + g.nx_pad;
        let bounds = [(cond0, nx), (pad0, cond0), (0, pad0)];
        let mut elements = Vec::with_capacity(nx * g.ny);
        let mut regions = Vec::with_capacity(nx * g.ny);
        for (region, (i0, i1)) in Region::ALL.into_iter().zip(bounds) {
            for j in 0..g.ny {
                for i in i0..i1 {
                    elements.push(quad(&node, i, j));
                    regions.push(region);
                }
            }
        }
        let mut mesh = Mesh {
            coords,
            elements,
            regions,
            node_sets: BTreeMap::new(),
            grid: None,
        };
        mesh.add_side_sets(nx, g.ny);
        let ny = g.ny;
        let col = |i: usize| (0..=ny).map(|j| node(i, j)).collect::<Vec<_>>();
        mesh.node_sets.insert("conductor_end".into(), col(nx));
        mesh.node_sets.insert("symmetry_plane".into(), col(0));
        mesh.node_sets.insert("pad_interface".into(), col(pad0));
        mesh.node_sets
            .insert("conductor_pad_interface".into(), col(cond0));
        let interior = (1..ny)
            .flat_map(|j| (1..pad0).map(move |i| (i, j)))
            .map(|(i, j)| node(i, j))
            .collect();
        mesh.node_sets.insert("slider_interior".into(), interior);
        mesh.grid = Some(GridInfo {
            nx,
            ny,
            slider_columns: 0..=pad0,
            slider_half_length: g.slider_half_length,
            height: g.height,
        });
        mesh.validate()?;
        Ok(mesh)
    }

    fn add_side_sets(&mut self, nx: usize, ny: usize) {
        let node = |i: usize, j: usize| j * (nx + 1) + i;
        let left: Vec<usize> = (0..=ny).map(|j| node(0, j)).collect();
        let right: Vec<usize> = (0..=ny).map(|j| node(nx, j)).collect();
        let bottom: Vec<usize> = (0..=nx).map(|i| node(i, 0)).collect();
        let top: Vec<usize> = (0..=nx).map(|i| node(i, ny)).collect();
        let mut boundary: Vec<usize> = left
            .iter()
            .chain(&right)
            .chain(&bottom)
            .chain(&top)
            .copied()
            .collect();
        boundary.sort_unstable();
        boundary.dedup();
        for (name, set) in [
            ("left", left),
            ("right", right),
            ("bottom", bottom),
            ("top", top),
            ("boundary", boundary),
        ] {
            self.node_sets.insert(name.to_string(), set);
        }
    }

    /// Check every element has positive mapping determinant at the 2x2 Gauss points.
    pub fn validate(&self) -> Result<(), DiscretizationError> {
        let basis = BasisSet::bilinear(2)?;
        for (e, el) in self.elements.iter().enumerate() {
            for q in 0..basis.num_qps() {
                let mut jm = [[0.0; 2]; 2];
                for (i, &n) in el.iter().enumerate() {
                    let g = basis.ref_grad(i, q);
                    for a in 0..2 {
                        for b in 0..2 {
                            jm[a][b] += self.coords[n][a] * g[b];
                        }
                    }
                }
                let det = jm[0][0] * jm[1][1] - jm[0][1] * jm[1][0];
                if !(det > 0.0) {
                    return Err(DiscretizationError::NonPositiveJacobian { element: e, det });
                }
            }
        }
        Ok(())
    }

    /// Same topology with new coordinates.
    pub fn with_coords(&self, coords: Vec<[f64; 2]>) -> Result<Mesh, DiscretizationError> {
        assert_eq!(coords.len(), self.coords.len(), "coordinate count changed");
        let m = Mesh {
            coords,
            ..self.clone()
        };
        m.validate()?;
        Ok(m)
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &[usize; 4] {
        &self.elements[e]
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, e: usize) -> Region {
        self.regions[e]
    }

    pub fn node_set(&self, name: &str) -> Option<&[usize]> {
        self.node_sets.get(name).map(|v| v.as_slice())
    }

    pub fn node_sets(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.node_sets
    }

    pub fn grid(&self) -> Option<&GridInfo> {
        self.grid.as_ref()
    }

    pub fn region_area(&self, region: Region) -> f64 {
        self.elements
            .iter()
            .zip(&self.regions)
            .filter(|(_, &r)| r == region)
            .map(|(el, _)| {
                let p: Vec<[f64; 2]> = el.iter().map(|&n| self.coords[n]).collect();
                shoelace(&p)
            })
            .sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("nodes {}\n", self.coords.len());
        for c in &self.coords {
            s.push_str(&format!("{:.17e} {:.17e}\n", c[0], c[1]));
        }
        s.push_str(&format!("elements {}\n", self.elements.len()));
        for (el, r) in self.elements.iter().zip(&self.regions) {
            s.push_str(&format!("{} {} {} {} {}\n", el[0], el[1], el[2], el[3], r));
        }
        s.push_str(&format!("nodesets {}\n", self.node_sets.len()));
        for (name, ids) in &self.node_sets {
            s.push_str(name);
            s.push_str(&format!(" {}", ids.len()));
            for id in ids {
                s.push_str(&format!(" {id}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh, DiscretizationError> {
        let bad = |m: &str| DiscretizationError::Format(m.to_string());
        let mut it = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let count = |l: Option<&str>, key: &str| -> Result<usize, DiscretizationError> {
            let l = l.ok_or_else(|| bad(&format!("missing {key} header")))?;
            match l.split_whitespace().collect::<Vec<_>>().as_slice() {
                [k, n] if *k == key => n.parse().map_err(|_| bad(&format!("bad count in {l}"))),
                _ => Err(bad(&format!("expected `{key} <count>`, got `{l}`"))),
            }
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(&format!("bad number {s}")))
        };
        let nn = count(it.next(), "nodes")?;
        let mut coords = Vec::with_capacity(nn);
        for _ in 0..nn {
            let l = it.next().ok_or_else(|| bad("truncated node list"))?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 2 {
                return Err(bad(&format!("node line `{l}`")));
            }
            coords.push([num(v[0])?, num(v[1])?]);
        }
        let ne = count(it.next(), "elements")?;
        let idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| bad(&format!("bad index {s}")))
        };
        let mut elements = Vec::with_capacity(ne);
        let mut regions = Vec::with_capacity(ne);
        for _ in 0..ne {
            let l = it.next().ok_or_else(|| bad("truncated element list"))?;
            let v: Vec<&str> = l.split_whitespace().collect();
            if v.len() != 5 {
                return Err(bad(&format!("element line `{l}`")));
            }
            elements.push([idx(v[0])?, idx(v[1])?, idx(v[2])?, idx(v[3])?]);
            regions.push(v[4].parse()?);
        }
        let mut node_sets = BTreeMap::new();
        if let Some(l) = it.next() {
            let ns = count(Some(l), "nodesets")?;
            for _ in 0..ns {
                let l = it.next().ok_or_else(|| bad("truncated node sets"))?;
                let v: Vec<&str> = l.split_whitespace().collect();
                if v.len() < 2 || idx(v[1])? != v.len() - 2 {
                    return Err(bad(&format!("node set line `{l}`")));
                }
                let ids = v[2..]
                    .iter()
                    .map(|s| idx(s))
                    .collect::<Result<Vec<_>, _>>()?;
                node_sets.insert(v[0].to_string(), ids);
            }
        }
        Mesh::new(coords, elements, regions, node_sets)
    }
}

fn grid_nodes(xs: &[f64], ys: &[f64]) -> (Vec<[f64; 2]>, impl Fn(usize, usize) -> usize) {
    let mut coords = Vec::with_capacity(xs.len() * ys.len());
    for &y in ys {
        for &x in xs {
            coords.push([x, y]);
        }
    }
    let stride = xs.len();
    (coords, move |i: usize, j: usize| j * stride + i)
}

fn quad(node: &impl Fn(usize, usize) -> usize, i: usize, j: usize) -> [usize; 4] {
    [
        node(i, j),
        node(i + 1, j),
        node(i + 1, j + 1),
        node(i, j + 1),
    ]
}

/// Signed polygon area, positive for counterclockwise vertices.
pub fn shoelace(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    0.5 * (0..n)
        .map(|k| p[k][0] * p[(k + 1) % n][1] - p[(k + 1) % n][0] * p[k][1])
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_counts() {
        let m = Mesh::rectangle(1.0, 1.0, 2, 2, Region::Conductor).unwrap();
        assert_eq!(m.num_nodes(), 9);
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.node_set("left").unwrap(), &[0, 3, 6]);
    }

    #[test]
    fn demo_geometry_golden_counts() {
        let m = Mesh::slider(&SliderGeometry::default()).unwrap();
        assert_eq!(m.num_nodes(), 289);
        assert_eq!(m.num_elements(), 256);
        let count = |r| m.regions().iter().filter(|&&x| x == r).count();
        assert_eq!(
            (
                count(Region::Conductor),
                count(Region::Pad),
                count(Region::Slider)
            ),
            (128, 32, 96)
        );
        for name in [
            "conductor_end",
            "symmetry_plane",
            "slider_interior",
            "pad_interface",
        ] {
            assert!(!m.node_set(name).unwrap().is_empty(), "{name}");
        }
        assert_eq!(m.node_set("slider_interior").unwrap().len(), 5 * 15);
        // regions are contiguous blocks in element order
        assert!(m.regions().windows(2).all(|w| w[0] <= w[1]));
        // some pad element shares a node with some slider element
        let nodes_of = |r| -> std::collections::BTreeSet<usize> {
            m.elements()
                .iter()
                .zip(m.regions())
                .filter(|(_, &x)| x == r)
                .flat_map(|(e, _)| e.iter().copied())
                .collect()
        };
        assert!(!nodes_of(Region::Pad).is_disjoint(&nodes_of(Region::Slider)));
        assert!((m.region_area(Region::Slider) - 0.5).abs() < 1e-14);
        assert!(m
            .node_set("conductor_end")
            .unwrap()
            .iter()
            .all(|&n| m.coords()[n][0] == 1.6));
        assert!(m
            .node_set("symmetry_plane")
            .unwrap()
            .iter()
            .all(|&n| m.coords()[n][0] == 0.0));
    }

    #[test]
    fn degenerate_rejected() {
        let g = SliderGeometry {
            height: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            Mesh::slider(&g),
            Err(DiscretizationError::Degenerate(_))
        ));
    }

    #[test]
    fn inverted_element_detected() {
        let m = Mesh::rectangle(1.0, 1.0, 1, 1, Region::Slider).unwrap();
        let mut c = m.coords().to_vec();
        c.swap(0, 1);
        assert!(matches!(
            m.with_coords(c),
            Err(DiscretizationError::NonPositiveJacobian { element: 0, .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let m = Mesh::slider(&SliderGeometry {
            nx_conductor: 2,
            nx_pad: 1,
            nx_slider: 2,
            ny: 2,
            ..Default::default()
        })
        .unwrap();
        let back = Mesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.coords(), m.coords());
        assert_eq!(back.elements(), m.elements());
        assert_eq!(back.regions(), m.regions());
        assert_eq!(back.node_sets(), m.node_sets());
    }
}
