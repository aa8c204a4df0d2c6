//! Weight bundles on disk and extraction of the 2D matrices that get analyzed.
//!
//! A bundle is a directory holding `manifest.json` plus one raw tensor file per
//! layer. Tensor files are headerless little-endian IEEE-754 binary32 values,
//! row-major in the axis order the manifest declares:
//!
//! ```text
//! { "model_name": "vgg11",
//!   "layers": [ { "name": "features.0", "kind": "conv2d", "file": "features.0.bin",
//!                 "shape": [64, 3, 3, 3],
//!                 "axis_roles": ["out", "in", "kernel_h", "kernel_w"] } ] }
//! ```
//!
//! Axis roles are never inferred. Frameworks disagree on where the kernel axes
//! of a convolution live, so the exporter has to say.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Matrices whose smaller dimension falls below this are skipped by default.
pub const DEFAULT_MIN_MATRIX_DIM: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    #[serde(rename = "dense")]
    Dense,
    #[serde(rename = "conv1d")]
    Conv1D,
    #[serde(rename = "conv2d")]
    Conv2D,
}

impl LayerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Dense => "dense",
            LayerKind::Conv1D => "conv1d",
            LayerKind::Conv2D => "conv2d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(LayerKind::Dense),
            "conv1d" => Ok(LayerKind::Conv1D),
            "conv2d" => Ok(LayerKind::Conv2D),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisRole {
    Out,
    In,
    KernelH,
    KernelW,
}

impl AxisRole {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisRole::Out => "out",
            AxisRole::In => "in",
            AxisRole::KernelH => "kernel_h",
            AxisRole::KernelW => "kernel_w",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "out" => Some(AxisRole::Out),
            "in" => Some(AxisRole::In),
            "kernel_h" => Some(AxisRole::KernelH),
            "kernel_w" => Some(AxisRole::KernelW),
            _ => None,
        }
    }
}

/// A raw tensor as stored in a bundle, promoted to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl TensorRecord {
    /// Checks `product(shape) == data.len()` and that every value is finite.
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(Error::Manifest {
                path: PathBuf::from(&name),
                reason: format!("shape {shape:?} must be non-empty with positive dimensions"),
            });
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::ShapeMismatch {
                layer: name,
                expected,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: name, index });
        }
        Ok(Self { name, shape, data })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDescriptor {
    pub layer_id: usize,
    pub name: String,
    pub kind: LayerKind,
    /// `axis_roles[k]` is the role of tensor axis `k`.
    pub axis_roles: Vec<AxisRole>,
}

impl LayerDescriptor {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::AxisRoles {
            layer: self.name.clone(),
            reason,
        };
        let has = |r: AxisRole| self.axis_roles.contains(&r);
        match self.kind {
            LayerKind::Dense | LayerKind::Conv1D => {
                if self.axis_roles.len() != 2 || !has(AxisRole::Out) || !has(AxisRole::In) {
                    return Err(fail(format!(
                        "{} layers need exactly the roles [out, in], got {:?}",
                        self.kind.as_str(),
                        self.axis_roles
                    )));
                }
            }
            LayerKind::Conv2D => {
                let all = [
                    AxisRole::Out,
                    AxisRole::In,
                    AxisRole::KernelH,
                    AxisRole::KernelW,
                ];
                if self.axis_roles.len() != 4 || !all.iter().all(|&r| has(r)) {
                    return Err(fail(format!(
                        "conv2d layers need the four roles out, in, kernel_h, kernel_w; got {:?}",
                        self.axis_roles
                    )));
                }
            }
        }
        Ok(())
    }

    fn axis_of(&self, role: AxisRole) -> usize {
        self.axis_roles
            .iter()
            .position(|&r| r == role)
            .expect("validated descriptor carries every role it needs")
    }
}

/// One oriented 2D matrix: a dense layer, or one kernel position of a Conv2D layer.
///
/// `values` is row-major `n × m` with `n >= m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    pub layer_id: usize,
    pub slice_index: usize,
    pub n: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl WeightMatrix {
    /// Builds a matrix from row-major `rows × cols` data, transposing when
    /// needed so that the row count is the larger dimension.
    pub fn from_row_major(
        layer_id: usize,
        slice_index: usize,
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 || rows * cols != data.len() {
            return Err(Error::invalid(format!(
                "matrix {rows}x{cols} cannot hold {} values",
                data.len()
            )));
        }
        if rows >= cols {
            return Ok(Self {
                layer_id,
                slice_index,
                n: rows,
                m: cols,
                values: data,
            });
        }
        let mut t = vec![0.0; data.len()];
        for r in 0..rows {
            for c in 0..cols {
                t[c * rows + r] = data[r * cols + c];
            }
        }
        Ok(Self {
            layer_id,
            slice_index,
            n: cols,
            m: rows,
            values: t,
        })
    }

    /// Aspect ratio `n / m`, always at least 1.
    pub fn q(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.m + col]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// A kernel slice or layer left out of the analysis, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub layer_id: usize,
    pub slice_index: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub matrices: Vec<WeightMatrix>,
    pub skipped: Vec<SkipRecord>,
}

/// Splits a layer tensor into oriented 2D matrices.
///
/// Dense and Conv1D layers give one matrix. Conv2D layers give `kh * kw`
/// matrices of shape `out × in`; slice `i` is kernel position
/// `(i / kw, i % kw)`. Matrices whose smaller side is below `min_dim` are
/// recorded in the skip log instead.
pub fn extract_matrices(
    descriptor: &LayerDescriptor,
    tensor: &TensorRecord,
    min_dim: usize,
) -> Result<Extraction> {
    descriptor.validate()?;
    if tensor.shape.len() != descriptor.axis_roles.len() {
        return Err(Error::AxisRoles {
            layer: descriptor.name.clone(),
            reason: format!(
                "tensor has {} axes but {} roles are declared",
                tensor.shape.len(),
                descriptor.axis_roles.len()
            ),
        });
    }

    let strides = row_major_strides(&tensor.shape);
    let ax_out = descriptor.axis_of(AxisRole::Out);
    let ax_in = descriptor.axis_of(AxisRole::In);
    let (n_out, n_in) = (tensor.shape[ax_out], tensor.shape[ax_in]);
    let (s_out, s_in) = (strides[ax_out], strides[ax_in]);

    let (kh, kw, s_kh, s_kw) = match descriptor.kind {
        LayerKind::Conv2D => {
            let h = descriptor.axis_of(AxisRole::KernelH);
            let w = descriptor.axis_of(AxisRole::KernelW);
            (tensor.shape[h], tensor.shape[w], strides[h], strides[w])
        }
        LayerKind::Dense | LayerKind::Conv1D => (1, 1, 0, 0),
    };

    let mut out = Extraction::default();
    for slice in 0..kh * kw {
        let (h, w) = (slice / kw, slice % kw);
        if n_out.min(n_in) < min_dim {
            out.skipped.push(SkipRecord {
                layer_id: descriptor.layer_id,
                slice_index: Some(slice),
                reason: format!(
                    "matrix {n_out}x{n_in} has smaller dimension below min_dim {min_dim}"
                ),
            });
            continue;
        }
        let base = h * s_kh + w * s_kw;
        let mut data = Vec::with_capacity(n_out * n_in);
        for o in 0..n_out {
            for i in 0..n_in {
                data.push(tensor.data[base + o * s_out + i * s_in]);
            }
        }
        out.matrices.push(WeightMatrix::from_row_major(
            descriptor.layer_id,
            slice,
            n_out,
            n_in,
            data,
        )?);
    }
    Ok(out)
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    model_name: String,
    layers: Vec<ManifestLayer>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestLayer {
    name: String,
    kind: String,
    file: String,
    shape: Vec<usize>,
    axis_roles: Vec<String>,
}

/// A loaded bundle: the model name plus each manifest entry in manifest order.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub model_name: String,
    pub layers: Vec<(LayerDescriptor, TensorRecord)>,
}

impl Bundle {
    /// Extracts every matrix of every layer, concatenating the skip logs.
    pub fn extract_all(&self, min_dim: usize) -> Result<Extraction> {
        let mut all = Extraction::default();
        for (descriptor, tensor) in &self.layers {
            let mut part = extract_matrices(descriptor, tensor, min_dim)?;
            all.matrices.append(&mut part.matrices);
            all.skipped.append(&mut part.skipped);
        }
        Ok(all)
    }
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<Bundle> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::MissingManifest(manifest_path));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Manifest {
        path: manifest_path.clone(),
        reason: e.to_string(),
    })?;

    let mut layers = Vec::with_capacity(manifest.layers.len());
    for (layer_id, entry) in manifest.layers.into_iter().enumerate() {
        let kind = LayerKind::parse(&entry.kind)?;
        let axis_roles = entry
            .axis_roles
            .iter()
            .map(|r| {
                AxisRole::parse(r).ok_or_else(|| Error::AxisRoles {
                    layer: entry.name.clone(),
                    reason: format!("unknown axis role {r:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let descriptor = LayerDescriptor {
            layer_id,
            name: entry.name.clone(),
            kind,
            axis_roles,
        };
        descriptor.validate()?;
        if entry.shape.len() != descriptor.axis_roles.len() {
            return Err(Error::AxisRoles {
                layer: entry.name,
                reason: format!(
                    "shape {:?} has {} axes but {} roles are declared",
                    entry.shape,
                    entry.shape.len(),
                    descriptor.axis_roles.len()
                ),
            });
        }

        let tensor_path = dir.join(&entry.file);
        let bytes = fs::read(&tensor_path).map_err(|e| Error::io(&tensor_path, e))?;
        if bytes.len() % 4 != 0 {
            return Err(Error::ShapeMismatch {
                layer: entry.name,
                expected: entry.shape.iter().product(),
                actual: bytes.len() / 4,
            });
        }
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let tensor = TensorRecord::new(entry.name, entry.shape, data)?;
        layers.push((descriptor, tensor));
    }
    Ok(Bundle {
        model_name: manifest.model_name,
        layers,
    })
}

/// Writes a bundle, narrowing every value to `f32`.
pub fn write_bundle(
    dir: impl AsRef<Path>,
    model_name: &str,
    layers: &[(LayerDescriptor, TensorRecord)],
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(layers.len());
    for (k, (descriptor, tensor)) in layers.iter().enumerate() {
        let file = format!("{k:04}_{}.bin", sanitize(&descriptor.name));
        let mut bytes = Vec::with_capacity(tensor.data.len() * 4);
        for &v in &tensor.data {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        let path = dir.join(&file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestLayer {
            name: descriptor.name.clone(),
            kind: descriptor.kind.as_str().to_string(),
            file,
            shape: tensor.shape.clone(),
            axis_roles: descriptor
                .axis_roles
                .iter()
                .map(|r| r.as_str().to_string())
                .collect(),
        });
    }
    let manifest = Manifest {
        model_name: model_name.to_string(),
        layers: entries,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}
