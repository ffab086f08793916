use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("point ({x}, {y}) does not dominate the reference point ({rx}, {ry})")]
pub struct BelowReference {
    pub x: f64,
    pub y: f64,
    pub rx: f64,
    pub ry: f64,
}

/// Area of the union of the boxes spanned by `reference` and each point.
///
/// Sweeps points by descending first coordinate; dominated points add no area.
pub fn hypervolume(points: &[[f64; 2]], reference: [f64; 2]) -> Result<f64, BelowReference> {
    let mut sorted = Vec::with_capacity(points.len());
    for p in points {
        if p[0] < reference[0] || p[1] < reference[1] {
            return Err(BelowReference {
                x: p[0],
                y: p[1],
                rx: reference[0],
                ry: reference[1],
            });
        }
        sorted.push(*p);
    }
    sorted.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut area = 0.0;
    let mut top = reference[1];
    for p in sorted {
        if p[1] > top {
            area += (p[0] - reference[0]) * (p[1] - top);
            top = p[1];
        }
    }
    Ok(area)
}
