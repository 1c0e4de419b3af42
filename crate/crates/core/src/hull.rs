//! Lower convex envelopes of finite point sets describing non-increasing
//! trade-offs (key rate vs. coding rate, rate vs. distortion).

/// Comparison tolerance for Pareto filtering and collinearity.
pub const HULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub x: f64,
    pub y: f64,
    /// Index of the originating point in the input slice.
    pub source: usize,
}

/// Value of an envelope at some abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeValue {
    Feasible(f64),
    /// Left of every achievable point.
    Infeasible,
}

impl EnvelopeValue {
    pub fn feasible(self) -> Option<f64> {
        match self {
            EnvelopeValue::Feasible(v) => Some(v),
            EnvelopeValue::Infeasible => None,
        }
    }
}

/// Time-sharing between two envelope vertices: a fraction `weight_left` of
/// the time at `left`, the rest at `right`. `left == right` when the query
/// sits on a vertex or beyond the last one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mix {
    pub left: Vertex,
    pub right: Vertex,
    pub weight_left: f64,
}

/// Piecewise-linear, convex, non-increasing lower envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    vertices: Vec<Vertex>,
}

/// Indices of points not dominated by another point with `x <=` and `y <=`
/// (one strict). Duplicates keep the first occurrence. Returned sorted by x.
pub fn pareto_indices(points: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a].0.total_cmp(&points[b].0).then(points[a].1.total_cmp(&points[b].1)).then(a.cmp(&b))
    });
    let mut keep = Vec::new();
    let mut best_y = f64::INFINITY;
    for i in order {
        if points[i].1 < best_y - HULL_TOL {
            best_y = points[i].1;
            keep.push(i);
        }
    }
    keep
}

fn cross(a: &Vertex, b: &Vertex, c: &Vertex) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

impl Envelope {
    /// Pareto-filter then take the lower hull; collinear interior points are
    /// dropped from the vertex list.
    pub fn from_points(points: &[(f64, f64)]) -> Envelope {
        let mut hull: Vec<Vertex> = Vec::new();
        for i in pareto_indices(points) {
            let v = Vertex { x: points[i].0, y: points[i].1, source: i };
            while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &v) <= HULL_TOL {
                hull.pop();
            }
            hull.push(v);
        }
        Envelope { vertices: hull }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Smallest abscissa at which the envelope is defined.
    pub fn min_x(&self) -> Option<f64> {
        self.vertices.first().map(|v| v.x)
    }

    pub fn mix_at(&self, x: f64) -> Option<Mix> {
        let first = self.vertices.first()?;
        if x < first.x - HULL_TOL {
            return None;
        }
        let last = self.vertices.last()?;
        if x >= last.x {
            return Some(Mix { left: *last, right: *last, weight_left: 1.0 });
        }
        for pair in self.vertices.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if x <= b.x {
                if x <= a.x {
                    return Some(Mix { left: a, right: a, weight_left: 1.0 });
                }
                let weight_left = (b.x - x) / (b.x - a.x);
                return Some(Mix { left: a, right: b, weight_left });
            }
        }
        unreachable!("x lies inside the vertex range")
    }

    pub fn eval(&self, x: f64) -> EnvelopeValue {
        match self.mix_at(x) {
            Some(m) => EnvelopeValue::Feasible(m.weight_left * m.left.y + (1.0 - m.weight_left) * m.right.y),
            None => EnvelopeValue::Infeasible,
        }
    }

    /// `true` when `(x, y)` lies on the envelope within the hull tolerance.
    pub fn touches(&self, x: f64, y: f64) -> bool {
        matches!(self.eval(x), EnvelopeValue::Feasible(v) if (v - y).abs() <= 1e-9)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_segment() {
        let env = Envelope::from_points(&[(0.0, 0.811278), (0.25, 0.0), (0.75, 0.811278), (1.0, 0.0)]);
        assert_eq!(env.vertices().len(), 2);
        assert_eq!(env.eval(0.125), EnvelopeValue::Feasible(0.405639));
        assert_eq!(env.eval(5.0), EnvelopeValue::Feasible(0.0));
        assert_eq!(env.eval(-0.1), EnvelopeValue::Infeasible);
    }

    #[test]
    fn drops_points_above_hull() {
        let pts = [(0.0, 2.0), (1.0, 1.5), (2.0, 0.0)];
        let env = Envelope::from_points(&pts);
        assert_eq!(env.vertices().len(), 2);
        assert!(!env.touches(1.0, 1.5));
        assert!(env.touches(1.0, 1.0));
    }

    #[test]
    fn collinear_interior_dropped_but_touching() {
        let pts = [(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)];
        let env = Envelope::from_points(&pts);
        assert_eq!(env.vertices().iter().map(|v| v.source).collect::<Vec<_>>(), vec![0, 2]);
        assert!(env.touches(1.0, 1.0));
    }

    #[test]
    fn mix_weights() {
        let env = Envelope::from_points(&[(2.0, 2.0), (3.0, 1.9)]);
        let m = env.mix_at(2.25).unwrap();
        assert_eq!(m.left.source, 0);
        assert_eq!(m.right.source, 1);
        assert!((m.weight_left - 0.75).abs() < 1e-15);
        let at_vertex = env.mix_at(2.0).unwrap();
        assert_eq!(at_vertex.left, at_vertex.right);
    }

    #[test]
    fn pareto_filter() {
        let pts = [(1.0, 1.0), (1.0, 0.5), (2.0, 0.7), (3.0, 0.2), (0.5, 3.0)];
        assert_eq!(pareto_indices(&pts), vec![4, 1, 3]);
    }
}
