use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use super::mask::BinaryMask;

/// A maximal 4-connected set of on-pixels with its shape measures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    /// Pixels in row-major order.
    pub pixels: Vec<(usize, usize)>,
    pub area: usize,
    /// Exposed edge count: sum over pixels of (4 - in-component 4-neighbors).
    pub perimeter: usize,
    /// `4 pi area / perimeter^2`.
    pub compactness: f64,
}

impl Component {
    pub fn from_pixels(mut pixels: Vec<(usize, usize)>) -> Self {
        pixels.sort_unstable();
        let (area, perimeter, compactness) = component_metrics(&pixels);
        Self {
            pixels,
            area,
            perimeter,
            compactness,
        }
    }
}

/// Area, perimeter and compactness of a non-empty pixel set.
pub fn component_metrics(pixels: &[(usize, usize)]) -> (usize, usize, f64) {
    assert!(!pixels.is_empty(), "metrics of an empty component");
    let mut sorted = pixels.to_vec();
    sorted.sort_unstable();
    let contains = |r: isize, c: isize| {
        r >= 0 && c >= 0 && sorted.binary_search(&(r as usize, c as usize)).is_ok()
    };
    let mut perimeter = 0usize;
    for &(r, c) in &sorted {
        let (r, c) = (r as isize, c as isize);
        let inside = [(r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)]
            .into_iter()
            .filter(|&(rr, cc)| contains(rr, cc))
            .count();
        perimeter += 4 - inside;
    }
    let area = sorted.len();
    let compactness = 4.0 * PI * area as f64 / (perimeter * perimeter) as f64;
    (area, perimeter, compactness)
}

/// Labeled components of a mask, discovered in row-major scan order.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ComponentSet {
    pub components: Vec<Component>,
}

impl ComponentSet {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_area(&self) -> usize {
        self.components.iter().map(|c| c.area).sum()
    }
}

/// Breadth-first flood fill over 4-neighbors.
pub fn label_components_4(mask: &BinaryMask) -> ComponentSet {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut seen = vec![false; rows * cols];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for r0 in 0..rows {
        for c0 in 0..cols {
            if !mask.get(r0, c0) || seen[r0 * cols + c0] {
                continue;
            }
            seen[r0 * cols + c0] = true;
            queue.push_back((r0, c0));
            let mut pixels = Vec::new();
            while let Some((r, c)) = queue.pop_front() {
                pixels.push((r, c));
                let mut visit = |rr: usize, cc: usize| {
                    if mask.get(rr, cc) && !seen[rr * cols + cc] {
                        seen[rr * cols + cc] = true;
                        queue.push_back((rr, cc));
                    }
                };
                if r > 0 {
                    visit(r - 1, c);
                }
                if r + 1 < rows {
                    visit(r + 1, c);
                }
                if c > 0 {
                    visit(r, c - 1);
                }
                if c + 1 < cols {
                    visit(r, c + 1);
                }
            }
            components.push(Component::from_pixels(pixels));
        }
    }
    ComponentSet { components }
}

/// Size and shape limits a component must satisfy to count as a person.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentLimits {
    pub area_min: usize,
    pub area_max: usize,
    pub compactness_min: f64,
}

impl ComponentLimits {
    pub fn accepts(&self, c: &Component) -> bool {
        c.area >= self.area_min && c.area <= self.area_max && c.compactness >= self.compactness_min
    }
}

pub fn valid_components(cs: &ComponentSet, limits: &ComponentLimits) -> ComponentSet {
    ComponentSet {
        components: cs
            .components
            .iter()
            .filter(|c| limits.accepts(c))
            .cloned()
            .collect(),
    }
}
