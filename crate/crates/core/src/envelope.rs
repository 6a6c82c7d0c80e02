//! Convex lower and concave upper envelopes of tabulated points.

use crate::scalar::Scalar;

/// A piecewise-linear function through `vertices` (sorted by x), constant
/// when there is a single vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope<S> {
    pub vertices: Vec<(S, S)>,
}

/// `y = slope * x + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line<S> {
    pub slope: S,
    pub intercept: S,
}

impl<S: Scalar> Line<S> {
    pub fn at(&self, x: &S) -> S {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }
}

/// Convex lower envelope (lower hull) of points sorted by strictly increasing x.
pub fn convex_lower<S: Scalar>(points: &[(S, S)]) -> Envelope<S> {
    hull(points, |a, b, c| !below_chord(a, b, c))
}

/// Concave upper envelope (upper hull) of points sorted by strictly increasing x.
pub fn concave_upper<S: Scalar>(points: &[(S, S)]) -> Envelope<S> {
    hull(points, |a, b, c| !above_chord(a, b, c))
}

fn hull<S: Scalar>(points: &[(S, S)], drop_middle: impl Fn(&(S, S), &(S, S), &(S, S)) -> bool) -> Envelope<S> {
    let mut out: Vec<(S, S)> = Vec::with_capacity(points.len());
    for p in points {
        while out.len() >= 2 && drop_middle(&out[out.len() - 2], &out[out.len() - 1], p) {
            out.pop();
        }
        out.push(p.clone());
    }
    Envelope { vertices: out }
}

/// Whether `b` lies strictly below the chord from `a` to `c`.
fn below_chord<S: Scalar>(a: &(S, S), b: &(S, S), c: &(S, S)) -> bool {
    // (b.y - a.y) * (c.x - a.x) < (c.y - a.y) * (b.x - a.x)
    (b.1.clone() - a.1.clone()) * (c.0.clone() - a.0.clone())
        < (c.1.clone() - a.1.clone()) * (b.0.clone() - a.0.clone())
}

fn above_chord<S: Scalar>(a: &(S, S), b: &(S, S), c: &(S, S)) -> bool {
    (b.1.clone() - a.1.clone()) * (c.0.clone() - a.0.clone())
        > (c.1.clone() - a.1.clone()) * (b.0.clone() - a.0.clone())
}

impl<S: Scalar> Envelope<S> {
    /// One line per segment; a single vertex yields a horizontal line.
    pub fn lines(&self) -> Vec<Line<S>> {
        if self.vertices.len() == 1 {
            return vec![Line {
                slope: S::zero(),
                intercept: self.vertices[0].1.clone(),
            }];
        }
        self.vertices
            .windows(2)
            .map(|w| {
                let (x0, y0) = &w[0];
                let (x1, y1) = &w[1];
                let slope = (y1.clone() - y0.clone()) / (x1.clone() - x0.clone());
                let intercept = y0.clone() - slope.clone() * x0.clone();
                Line { slope, intercept }
            })
            .collect()
    }

    /// Linear interpolation between vertices; clamps outside the x range.
    pub fn value_at(&self, x: &S) -> S {
        let v = &self.vertices;
        if *x <= v[0].0 {
            return v[0].1.clone();
        }
        for w in v.windows(2) {
            if *x <= w[1].0 {
                let t = (x.clone() - w[0].0.clone()) / (w[1].0.clone() - w[0].0.clone());
                return w[0].1.clone() + t * (w[1].1.clone() - w[0].1.clone());
            }
        }
        v[v.len() - 1].1.clone()
    }

    pub fn min_value(&self) -> S {
        self.vertices
            .iter()
            .map(|(_, y)| y.clone())
            .reduce(|a, b| if b < a { b } else { a })
            .expect("nonempty envelope")
    }

    pub fn max_value(&self) -> S {
        self.vertices
            .iter()
            .map(|(_, y)| y.clone())
            .reduce(|a, b| if b > a { b } else { a })
            .expect("nonempty envelope")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(ys: &[f64]) -> Vec<(f64, f64)> {
        ys.iter().enumerate().map(|(i, y)| (i as f64 + 1.0, *y)).collect()
    }

    #[test]
    fn convex_points_are_kept() {
        let env = convex_lower(&pts(&[1.0, 2.0, 5.0]));
        assert_eq!(env.vertices.len(), 3);
        let env = concave_upper(&pts(&[1.0, 2.0, 5.0]));
        assert_eq!(env.vertices.len(), 2);
    }

    #[test]
    fn lines_interpolate_vertices() {
        let env = convex_lower(&[(0.0_f64, 3.0), (0.4, 2.0), (0.8, 1.0)]);
        let lines = env.lines();
        for line in &lines {
            assert!((line.at(&0.0) - 3.0).abs() < 1e-12);
            assert!((line.at(&0.8) - 1.0).abs() < 1e-12);
        }
        assert!((env.value_at(&0.4) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_point_is_constant() {
        let env = convex_lower(&[(2.0, 7.0)]);
        assert_eq!(
            env.lines(),
            vec![Line {
                slope: 0.0,
                intercept: 7.0
            }]
        );
    }

    proptest! {
        #[test]
        fn envelopes_bound_the_points(ys in proptest::collection::vec(0.0f64..10.0, 1..6)) {
            let points = pts(&ys);
            let lower = convex_lower(&points);
            let upper = concave_upper(&points);
            for (x, y) in &points {
                prop_assert!(lower.value_at(x) <= y + 1e-9);
                prop_assert!(upper.value_at(x) >= y - 1e-9);
                // max of lower lines equals the lower envelope on its domain
                let lo = lower.lines().iter().map(|l| l.at(x)).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!((lo - lower.value_at(x)).abs() < 1e-9);
                let hi = upper.lines().iter().map(|l| l.at(x)).fold(f64::INFINITY, f64::min);
                prop_assert!((hi - upper.value_at(x)).abs() < 1e-9);
            }
            // hull vertices are original points, so the envelope is exact there
            for v in &lower.vertices {
                prop_assert!(points.contains(v));
            }
        }
    }
}
