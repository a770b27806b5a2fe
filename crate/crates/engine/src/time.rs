//! Multi-dimensional timestamps under the product partial order.
//!
//! Coordinate 0 is the view index; each enclosing loop adds one iteration
//! coordinate. Two timestamps are comparable only within the same scope
//! (equal arity). The worklists order timestamps lexicographically, which is
//! a linear extension of the product order for equal-arity times.

pub type Time = Vec<u32>;

/// Product order: a <= b pointwise.
pub fn partial_le(a: &Time, b: &Time) -> bool {
    debug_assert_eq!(a.len(), b.len(), "comparing times of different scopes");
    a.iter().zip(b).all(|(x, y)| x <= y)
}

pub fn partial_lt(a: &Time, b: &Time) -> bool {
    a != b && partial_le(a, b)
}

/// Least upper bound: pointwise max.
pub fn lub(a: &Time, b: &Time) -> Time {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (*x).max(*y)).collect()
}

/// The view coordinate.
pub fn view_of(t: &Time) -> u32 {
    t[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_basics() {
        assert!(partial_le(&vec![0, 1], &vec![1, 1]));
        assert!(!partial_le(&vec![0, 2], &vec![1, 1]));
        assert!(!partial_le(&vec![1, 1], &vec![0, 2]));
        assert!(partial_lt(&vec![1, 1], &vec![1, 2]));
        assert!(!partial_lt(&vec![1, 1], &vec![1, 1]));
    }

    #[test]
    fn lub_is_pointwise_max() {
        assert_eq!(lub(&vec![0, 5], &vec![1, 2]), vec![1, 5]);
    }

    #[test]
    fn lexicographic_extends_product_order() {
        // If a <= b in the product order then a <= b lexicographically.
        let times = [vec![0, 0], vec![0, 3], vec![1, 1], vec![2, 0]];
        for a in &times {
            for b in &times {
                if partial_le(a, b) {
                    assert!(a <= b);
                }
            }
        }
    }
}
