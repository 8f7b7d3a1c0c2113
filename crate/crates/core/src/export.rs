//! Colored point-cloud output.

use std::fmt::Write as _;
use std::path::Path;

use crate::geom::Point3;

pub const UNCOVERED: [u8; 3] = [255, 255, 255];

/// Sensor colors, cycled by sensor index.
pub const PALETTE: [[u8; 3]; 12] = [
    [228, 26, 28],
    [55, 126, 184],
    [77, 175, 74],
    [152, 78, 163],
    [255, 127, 0],
    [166, 86, 40],
    [247, 129, 191],
    [102, 194, 165],
    [141, 160, 203],
    [166, 216, 84],
    [255, 217, 47],
    [27, 158, 119],
];

pub fn sensor_color(slot: usize) -> [u8; 3] {
    PALETTE[slot % PALETTE.len()]
}

/// One color per sample: its sensor's color, or white when uncovered.
pub fn color_by_assignment(assignment: &[Option<usize>]) -> Vec<[u8; 3]> {
    assignment
        .iter()
        .map(|a| a.map_or(UNCOVERED, sensor_color))
        .collect()
}

/// ASCII PLY with `x y z red green blue` vertices.
pub fn to_ply_string(points: &[Point3], colors: &[[u8; 3]]) -> String {
    assert_eq!(points.len(), colors.len(), "one color per point");
    let mut out = String::new();
    out.push_str("ply\nformat ascii 1.0\n");
    writeln!(out, "element vertex {}", points.len()).unwrap();
    for axis in ["x", "y", "z"] {
        writeln!(out, "property double {axis}").unwrap();
    }
    for c in ["red", "green", "blue"] {
        writeln!(out, "property uchar {c}").unwrap();
    }
    out.push_str("end_header\n");
    for (p, c) in points.iter().zip(colors) {
        writeln!(out, "{:?} {:?} {:?} {} {} {}", p.x, p.y, p.z, c[0], c[1], c[2]).unwrap();
    }
    out
}

pub fn write_ply(path: &Path, points: &[Point3], colors: &[[u8; 3]]) -> std::io::Result<()> {
    std::fs::write(path, to_ply_string(points, colors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncovered_is_white() {
        let colors = color_by_assignment(&[None, Some(0), Some(13)]);
        assert_eq!(colors, vec![UNCOVERED, PALETTE[0], PALETTE[1]]);
        assert!(!PALETTE.contains(&UNCOVERED));
    }

    #[test]
    fn ply_layout() {
        let text = to_ply_string(&[Point3::new(1.0, 2.0, 0.5)], &[[255, 255, 255]]);
        assert!(text.starts_with("ply\nformat ascii 1.0\nelement vertex 1\n"));
        assert!(text.ends_with("end_header\n1.0 2.0 0.5 255 255 255\n"));
    }
}
