//! Named-f32-tensor persistence on top of the safetensors container.

use std::collections::BTreeMap;
use std::path::Path;

use safetensors::tensor::{Dtype, TensorView};
use safetensors::SafeTensors;

use crate::error::{Error, Result};

fn f32_to_le_bytes(values: &[f32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 4);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn le_bytes_to_f32(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

/// Save `(name, shape, values)` tensors to one safetensors file.
pub fn save_tensors(path: &Path, tensors: &[(String, Vec<usize>, Vec<f32>)]) -> Result<()> {
    let buffers: Vec<Vec<u8>> = tensors.iter().map(|(_, _, v)| f32_to_le_bytes(v)).collect();
    let views: Vec<(String, TensorView)> = tensors
        .iter()
        .zip(&buffers)
        .map(|((name, shape, _), bytes)| {
            let view = TensorView::new(Dtype::F32, shape.clone(), bytes).map_err(|e| {
                Error::CorruptComponent {
                    component: name.clone(),
                    reason: e.to_string(),
                }
            })?;
            Ok((name.clone(), view))
        })
        .collect::<Result<_>>()?;
    safetensors::serialize_to_file(views, None, path).map_err(|e| Error::CorruptComponent {
        component: path.display().to_string(),
        reason: e.to_string(),
    })
}

/// Load every tensor in a safetensors file as (shape, f32 values).
pub fn load_tensors(path: &Path) -> Result<BTreeMap<String, (Vec<usize>, Vec<f32>)>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let st = SafeTensors::deserialize(&bytes).map_err(|e| Error::CorruptComponent {
        component: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut out = BTreeMap::new();
    for (name, view) in st.tensors() {
        if view.dtype() != Dtype::F32 {
            return Err(Error::CorruptComponent {
                component: name.clone(),
                reason: format!("expected f32 tensor, got {:?}", view.dtype()),
            });
        }
        out.insert(
            name.clone(),
            (view.shape().to_vec(), le_bytes_to_f32(view.data())),
        );
    }
    Ok(out)
}

/// Fetch one tensor by name, validating its shape.
pub fn take_tensor(
    tensors: &mut BTreeMap<String, (Vec<usize>, Vec<f32>)>,
    name: &str,
    shape: &[usize],
) -> Result<Vec<f32>> {
    let (got_shape, values) = tensors.remove(name).ok_or_else(|| Error::CorruptComponent {
        component: name.to_string(),
        reason: "tensor missing".into(),
    })?;
    if got_shape != shape {
        return Err(Error::CorruptComponent {
            component: name.to_string(),
            reason: format!("shape {got_shape:?}, expected {shape:?}"),
        });
    }
    Ok(values)
}
