//! Point clouds: storage, file I/O, normal estimation and the smoothing
//! projection used for noisy input.

mod normals;

use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{Point3, UnitNormal, Vec3};
use crate::io::{self, Format, RawGeometry};

pub use normals::{estimate_normals, smooth_project, NormalEstimate};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub positions: Vec<Point3>,
    pub normals: Option<Vec<UnitNormal>>,
    /// Positions as read from the input; smoothing only touches `positions`.
    pub original_positions: Vec<Point3>,
}

fn check_finite(positions: &[Point3]) -> Result<()> {
    match positions.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

impl PointCloud {
    pub fn new(positions: Vec<Point3>) -> Result<Self> {
        check_finite(&positions)?;
        Ok(PointCloud {
            original_positions: positions.clone(),
            positions,
            normals: None,
        })
    }

    /// Normals are normalized; a zero or non-finite normal is an error.
    pub fn with_normals(positions: Vec<Point3>, normals: Vec<Vec3>) -> Result<Self> {
        assert_eq!(positions.len(), normals.len(), "one normal per point");
        let mut cloud = Self::new(positions)?;
        let normals = normals
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                if !n.iter().all(|c| c.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
                Ok(UnitNormal::new_normalize(n)?)
            })
            .collect::<Result<Vec<_>>>()?;
        cloud.normals = Some(normals);
        Ok(cloud)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Normal of point `i`. Panics if the cloud has no normals.
    pub fn normal(&self, i: usize) -> &UnitNormal {
        &self.normals.as_ref().expect("point cloud has normals")[i]
    }

    /// Loads a cloud, choosing the format from the file extension.
    pub fn load(path: &Path) -> Result<Self> {
        Self::load_format(path, Format::from_path(path)?)
    }

    /// Loads a cloud; faces in mesh files are ignored.
    pub fn load_format(path: &Path, format: Format) -> Result<Self> {
        let raw = io::read(path, format)?;
        match raw.normals {
            Some(n) => Self::with_normals(raw.positions, n),
            None => Self::new(raw.positions),
        }
    }

    pub fn save(&self, path: &Path, format: Format) -> Result<()> {
        let raw = RawGeometry {
            positions: self.positions.clone(),
            normals: self.normals.as_ref().map(|n| n.iter().map(|n| n.into_inner()).collect()),
            faces: Vec::new(),
        };
        io::write(path, format, &raw, false)?;
        Ok(())
    }
}

/// Length of `e` averaged over its projections into the two tangent planes.
pub fn projected_length(e: &Vec3, nu: &UnitNormal, nv: &UnitNormal) -> f64 {
    let along_u = e - nu.as_vec() * e.dot(nu.as_vec());
    let along_v = e - nv.as_vec() * e.dot(nv.as_vec());
    0.5 * (along_u.norm() + along_v.norm())
}

/// Projection distance between points `u` and `v` of a cloud with normals.
pub fn projection_distance(cloud: &PointCloud, u: usize, v: usize) -> f64 {
    let e = cloud.positions[v] - cloud.positions[u];
    projected_length(&e, cloud.normal(u), cloud.normal(v))
}
