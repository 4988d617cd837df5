use std::collections::VecDeque;

use crate::error::{Error, Result};

use super::SilhouetteMask;

/// Ordered closed boundary of a silhouette, in pixel coordinates (y grows downward).
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    points: Vec<(f64, f64)>,
}

impl Contour {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::input(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::input("contour has non-finite coordinates"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        Self::new(self.points.iter().map(|&(x, y)| f(x, y)).collect())
    }
}

// Clockwise on screen (y down), starting from west.
const RING: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn ring_index(dx: i64, dy: i64) -> usize {
    RING.iter()
        .position(|&o| o == (dx, dy))
        .expect("offset is an 8-neighbour")
}

/// Labels of the largest 8-connected foreground component. Ties go to the
/// component met first in raster order.
fn largest_component(mask: &SilhouetteMask) -> Option<Vec<bool>> {
    let (w, h) = (mask.width(), mask.height());
    let mut label = vec![0u32; w * h];
    let mut next = 0u32;
    let mut best: Option<(u32, usize)> = None;
    let mut queue = VecDeque::new();

    for start in 0..w * h {
        if !mask.bits()[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0usize;
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (x, y) = ((idx % w) as i64, (idx / w) as i64);
            for &(dx, dy) in &RING {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get_signed(nx, ny) {
                    let n = ny as usize * w + nx as usize;
                    if label[n] == 0 {
                        label[n] = next;
                        queue.push_back(n);
                    }
                }
            }
        }
        if best.map_or(true, |(_, s)| size > s) {
            best = Some((next, size));
        }
    }

    best.map(|(id, _)| label.iter().map(|&l| l == id).collect())
}

/// Traces the outer boundary of the largest 8-connected foreground component.
///
/// Moore-neighbour tracing with Jacob's stopping criterion: tracing starts at the
/// top-most, then left-most pixel of the component, entered from the west, walks
/// clockwise, and stops when the start pixel is re-entered from the same side
/// (or the first step out of it is about to repeat).
/// Interior holes never reach the trace.
pub fn trace_contour(mask: &SilhouetteMask) -> Result<Contour> {
    let w = mask.width();
    let comp = largest_component(mask)
        .ok_or_else(|| Error::DegenerateSilhouette("mask has no foreground pixels".into()))?;
    let inside = |x: i64, y: i64| -> bool {
        x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < mask.height() && comp[y as usize * w + x as usize]
    };

    let first = comp.iter().position(|&b| b).expect("component is nonempty");
    let start = ((first % w) as i64, (first / w) as i64);
    let start_back = 0usize; // west

    let mut points = vec![start];
    let mut current = start;
    let mut back = start_back;
    let mut first_move = None;
    let limit = 4 * comp.len() + 16;

    loop {
        let mut found = None;
        for step in 1..=8 {
            let dir = (back + step) % 8;
            let (dx, dy) = RING[dir];
            let cand = (current.0 + dx, current.1 + dy);
            if inside(cand.0, cand.1) {
                let (px, py) = RING[(back + step - 1) % 8];
                let prev = (current.0 + px, current.1 + py);
                found = Some((cand, ring_index(prev.0 - cand.0, prev.1 - cand.1)));
                break;
            }
        }
        let Some((next, next_back)) = found else {
            // isolated pixel
            break;
        };
        if next == start && next_back == start_back {
            break;
        }
        // thin parts can make the start re-entry from the west impossible;
        // repeating the first move out of the start closes the loop as well
        if current == start && first_move == Some((next, next_back)) {
            points.pop();
            break;
        }
        first_move.get_or_insert((next, next_back));
        points.push(next);
        current = next;
        back = next_back;
        if points.len() > limit {
            return Err(Error::DegenerateSilhouette(
                "boundary trace did not close".into(),
            ));
        }
    }

    let mut distinct = points.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateSilhouette(format!(
            "largest component has {} boundary pixels, need at least 3",
            distinct.len()
        )));
    }

    Contour::new(points.into_iter().map(|(x, y)| (x as f64, y as f64)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(rows: &[&str]) -> SilhouetteMask {
        let h = rows.len();
        let w = rows[0].len();
        SilhouetteMask::from_fn(w, h, |x, y| rows[y].as_bytes()[x] == b'#').unwrap()
    }

    fn is_neighbor(a: (f64, f64), b: (f64, f64)) -> bool {
        let (dx, dy) = ((a.0 - b.0).abs(), (a.1 - b.1).abs());
        dx <= 1.0 && dy <= 1.0 && (dx, dy) != (0.0, 0.0)
    }

    #[test]
    fn single_pixel_is_degenerate() {
        let mask = mask_from(&["...", ".#.", "..."]);
        assert!(matches!(
            trace_contour(&mask),
            Err(Error::DegenerateSilhouette(_))
        ));
    }

    #[test]
    fn two_pixels_are_degenerate() {
        let mask = mask_from(&["....", ".##.", "...."]);
        assert!(trace_contour(&mask).is_err());
    }

    #[test]
    fn empty_mask_is_degenerate() {
        let mask = mask_from(&["...", "..."]);
        assert!(trace_contour(&mask).is_err());
    }

    #[test]
    fn filled_square_perimeter() {
        let mask = mask_from(&["......", ".####.", ".####.", ".####.", ".####.", "......"]);
        let c = trace_contour(&mask).unwrap();
        let pts = c.points();
        assert_eq!(pts.len(), 12);
        // clockwise from the top-left corner: along the top row first
        assert_eq!(pts[0], (1.0, 1.0));
        assert_eq!(pts[1], (2.0, 1.0));
        for i in 0..pts.len() {
            assert!(is_neighbor(pts[i], pts[(i + 1) % pts.len()]));
        }
        let mut expected = Vec::new();
        for y in 1..=4 {
            for x in 1..=4 {
                if x == 1 || x == 4 || y == 1 || y == 4 {
                    expected.push((x as f64, y as f64));
                }
            }
        }
        let mut got = pts.to_vec();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, expected);
    }

    #[test]
    fn largest_component_wins() {
        // 10-pixel blob at the top-left, 50-pixel block lower right
        let mask = SilhouetteMask::from_fn(20, 20, |x, y| {
            (x < 5 && y < 2) || ((8..18).contains(&x) && (10..15).contains(&y))
        })
        .unwrap();
        let c = trace_contour(&mask).unwrap();
        assert!(c
            .points()
            .iter()
            .all(|&(x, y)| (8.0..18.0).contains(&x) && (10.0..15.0).contains(&y)));
        assert_eq!(c.points()[0], (8.0, 10.0));
    }

    #[test]
    fn holes_are_ignored() {
        let mask = mask_from(&[".......", ".#####.", ".#...#.", ".#...#.", ".#####.", "......."]);
        let c = trace_contour(&mask).unwrap();
        assert_eq!(c.len(), 14);
    }

    #[test]
    fn thin_line_revisits() {
        let mask = mask_from(&[".....", ".###.", "....."]);
        let c = trace_contour(&mask).unwrap();
        assert_eq!(c.points(), &[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (2.0, 1.0)]);
    }

    #[test]
    fn diagonal_component_is_connected() {
        let mask = mask_from(&["#...", ".#..", "..#.", "...#"]);
        let c = trace_contour(&mask).unwrap();
        assert_eq!(c.points()[0], (0.0, 0.0));
        assert!(c.points().contains(&(3.0, 3.0)));
    }
}
