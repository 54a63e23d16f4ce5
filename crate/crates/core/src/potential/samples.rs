//! Sampled field values (and optional gradients) at observation points, with
//! a CSV exchange format: a mandatory header plus one row per point, floats
//! printed with 17 significant digits so files round-trip bit-exactly.

use super::PotentialError;
use nalgebra::{Vector2, Vector3};
use num_complex::Complex64;

/// Field samples at 2-D or 3-D observation points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSamples {
    dim: usize,
    points: Vec<[f64; 3]>,
    values: Vec<Complex64>,
    gradients: Option<Vec<[Complex64; 3]>>,
}

impl FieldSamples {
    /// Samples at 3-D points.
    ///
    /// # Panics
    /// Panics when lengths disagree.
    pub fn new3(
        points: &[Vector3<f64>],
        values: Vec<Complex64>,
        gradients: Option<Vec<Vector3<Complex64>>>,
    ) -> Self {
        assert_eq!(points.len(), values.len(), "points/values length mismatch");
        if let Some(g) = &gradients {
            assert_eq!(points.len(), g.len(), "points/gradients length mismatch");
        }
        FieldSamples {
            dim: 3,
            points: points.iter().map(|p| [p.x, p.y, p.z]).collect(),
            values,
            gradients: gradients.map(|gs| gs.into_iter().map(|g| [g.x, g.y, g.z]).collect()),
        }
    }

    /// Samples at 2-D points.
    ///
    /// # Panics
    /// Panics when lengths disagree.
    pub fn new2(
        points: &[Vector2<f64>],
        values: Vec<Complex64>,
        gradients: Option<Vec<Vector2<Complex64>>>,
    ) -> Self {
        assert_eq!(points.len(), values.len(), "points/values length mismatch");
        if let Some(g) = &gradients {
            assert_eq!(points.len(), g.len(), "points/gradients length mismatch");
        }
        let zero = Complex64::new(0.0, 0.0);
        FieldSamples {
            dim: 2,
            points: points.iter().map(|p| [p.x, p.y, 0.0]).collect(),
            values,
            gradients: gradients.map(|gs| gs.into_iter().map(|g| [g.x, g.y, zero]).collect()),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spatial dimension of the sample points (2 or 3).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_gradients(&self) -> bool {
        self.gradients.is_some()
    }

    /// Point `i` as a 3-vector (third component 0 for 2-D samples).
    pub fn point3(&self, i: usize) -> Vector3<f64> {
        let p = self.points[i];
        Vector3::new(p[0], p[1], p[2])
    }

    /// Point `i` as a 2-vector.
    pub fn point2(&self, i: usize) -> Vector2<f64> {
        let p = self.points[i];
        Vector2::new(p[0], p[1])
    }

    pub fn value(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Gradient of sample `i` (third component 0 for 2-D samples).
    ///
    /// # Panics
    /// Panics when gradients were not computed.
    pub fn gradient3(&self, i: usize) -> Vector3<Complex64> {
        let g = self.gradients.as_ref().expect("samples carry no gradients")[i];
        Vector3::new(g[0], g[1], g[2])
    }

    /// Largest value magnitude (0 for empty samples).
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Writes the CSV form; the header encodes dimension and gradient layout.
    pub fn write_csv(&self, out: &mut dyn std::io::Write) -> Result<(), PotentialError> {
        let header = match (self.dim, self.gradients.is_some()) {
            (3, false) => "x1,x2,x3,re_u,im_u",
            (3, true) => "x1,x2,x3,re_u,im_u,re_ux,im_ux,re_uy,im_uy,re_uz,im_uz",
            (2, false) => "x1,x2,re_u,im_u",
            (2, true) => "x1,x2,re_u,im_u,re_ux,im_ux,re_uy,im_uy",
            _ => unreachable!("dim is 2 or 3"),
        };
        writeln!(out, "{header}")?;
        for i in 0..self.points.len() {
            let p = self.points[i];
            let v = self.values[i];
            let mut cols: Vec<f64> = p[..self.dim].to_vec();
            cols.push(v.re);
            cols.push(v.im);
            if let Some(gs) = &self.gradients {
                for c in &gs[i][..self.dim] {
                    cols.push(c.re);
                    cols.push(c.im);
                }
            }
            let row: Vec<String> = cols.iter().map(|c| format!("{c:.16e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the CSV form written by [`FieldSamples::write_csv`].
    pub fn read_csv(input: &mut dyn std::io::Read) -> Result<Self, PotentialError> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| PotentialError::Format("empty CSV".into()))?;
        let (dim, with_grad) = match header.trim() {
            "x1,x2,x3,re_u,im_u" => (3, false),
            "x1,x2,x3,re_u,im_u,re_ux,im_ux,re_uy,im_uy,re_uz,im_uz" => (3, true),
            "x1,x2,re_u,im_u" => (2, false),
            "x1,x2,re_u,im_u,re_ux,im_ux,re_uy,im_uy" => (2, true),
            other => return Err(PotentialError::Format(format!("unknown CSV header '{other}'"))),
        };
        let ncols = dim + 2 + if with_grad { 2 * dim } else { 0 };
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut gradients = if with_grad { Some(Vec::new()) } else { None };
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| PotentialError::Format(format!("row {}: {e}", lineno + 2)))?;
            if cols.len() != ncols {
                return Err(PotentialError::Format(format!(
                    "row {}: {} columns, expected {ncols}",
                    lineno + 2,
                    cols.len()
                )));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(&cols[..dim]);
            points.push(p);
            values.push(Complex64::new(cols[dim], cols[dim + 1]));
            if let Some(gs) = gradients.as_mut() {
                let zero = Complex64::new(0.0, 0.0);
                let mut g = [zero; 3];
                for (j, slot) in g.iter_mut().enumerate().take(dim) {
                    *slot = Complex64::new(cols[dim + 2 + 2 * j], cols[dim + 3 + 2 * j]);
                }
                gs.push(g);
            }
        }
        Ok(FieldSamples { dim, points, values, gradients })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_bit_exactly() {
        let pts = vec![
            Vector3::new(0.1, -0.2, -1.0 / 3.0),
            Vector3::new(std::f64::consts::PI, 2.0_f64.sqrt(), -7.7),
        ];
        let vals = vec![
            Complex64::new(1.0 / 7.0, -0.125),
            Complex64::new(-3.25e-17, 1.0e300),
        ];
        let grads = vec![
            Vector3::new(
                Complex64::new(0.3, 0.4),
                Complex64::new(-0.5, 0.6),
                Complex64::new(0.7, -0.8),
            ),
            Vector3::new(
                Complex64::new(1.0 / 3.0, 2.0 / 3.0),
                Complex64::new(0.0, -0.0),
                Complex64::new(9.9e-9, 1.1),
            ),
        ];
        let s = FieldSamples::new3(&pts, vals, Some(grads));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = FieldSamples::read_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(s.dim(), back.dim());
        for i in 0..s.len() {
            assert_eq!(s.point3(i).x.to_bits(), back.point3(i).x.to_bits());
            assert_eq!(s.point3(i).z.to_bits(), back.point3(i).z.to_bits());
            assert_eq!(s.value(i).re.to_bits(), back.value(i).re.to_bits());
            assert_eq!(s.gradient3(i).y.im.to_bits(), back.gradient3(i).y.im.to_bits());
        }
    }

    #[test]
    fn two_dimensional_csv_keeps_its_header() {
        let pts = vec![Vector2::new(0.5, -2.0)];
        let s = FieldSamples::new2(&pts, vec![Complex64::new(1.0, 2.0)], None);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,re_u,im_u\n"));
        let back = FieldSamples::read_csv(&mut buf.as_slice()).unwrap();
        assert_eq!(back.dim(), 2);
        assert!(!back.has_gradients());
        assert_eq!(back.point2(0), pts[0]);
    }

    #[test]
    fn malformed_rows_are_reported_with_their_line_number() {
        let text = "x1,x2,re_u,im_u\n1.0,2.0,3.0\n";
        let err = FieldSamples::read_csv(&mut text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("row 2"));
    }
}
