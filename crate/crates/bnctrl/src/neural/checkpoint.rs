//! Self-contained binary checkpoints: little-endian, versioned, carrying
//! the architecture, the wiring, both parameter sets, and a fingerprint of
//! the Boolean network the agent was trained on.

use super::bdq::{BdqArch, BdqNetwork};
use super::NeuralError;
use crate::rng::RngStream;
use std::fs;
use std::io::Write;
use std::path::Path;

const MAGIC: &[u8; 4] = b"BNQC";
const VERSION: u32 = 1;

pub fn save_checkpoint(
    path: &Path,
    net: &BdqNetwork,
    model_fingerprint: u64,
) -> Result<(), NeuralError> {
    let arch = net.arch();
    let mut buf: Vec<u8> = Vec::with_capacity(32 + 16 * net.n_params());
    buf.extend_from_slice(MAGIC);
    put_u32(&mut buf, VERSION);
    put_u64(&mut buf, model_fingerprint);
    put_u32(&mut buf, net.n_nodes() as u32);
    put_u32(&mut buf, net.n_actions() as u32);
    put_widths(&mut buf, &arch.conv_widths);
    put_u32(&mut buf, arch.kernel_hidden as u32);
    put_widths(&mut buf, &arch.trunk_widths);
    put_widths(&mut buf, &arch.head_hidden);
    put_u32(&mut buf, arch.branches as u32);
    put_u64(&mut buf, net.edges().len() as u64);
    for &(u, v) in net.edges() {
        put_u32(&mut buf, u as u32);
        put_u32(&mut buf, v as u32);
    }
    put_u64(&mut buf, net.n_params() as u64);
    for &p in &net.online {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    for &p in &net.target {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Load a checkpoint. Returns the reconstructed network and the fingerprint
/// of the model it was trained on; the caller decides whether to accept it.
pub fn load_checkpoint(path: &Path) -> Result<(BdqNetwork, u64), NeuralError> {
    let bytes = fs::read(path)?;
    let mut c = Cursor {
        bytes: &bytes,
        pos: 0,
    };
    if c.take(4)? != MAGIC {
        return Err(NeuralError::Checkpoint("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(NeuralError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let fingerprint = c.u64()?;
    let n_nodes = c.u32()? as usize;
    let n_actions = c.u32()? as usize;
    let conv_widths = c.widths()?;
    let kernel_hidden = c.u32()? as usize;
    let trunk_widths = c.widths()?;
    let head_hidden = c.widths()?;
    let branches = c.u32()? as usize;
    let n_edges = c.u64()? as usize;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let u = c.u32()? as usize;
        let v = c.u32()? as usize;
        edges.push((u, v));
    }
    let arch = BdqArch {
        conv_widths,
        kernel_hidden,
        trunk_widths,
        head_hidden,
        branches,
    };
    let n_params = c.u64()? as usize;
    let mut scratch = RngStream::new(0, "checkpoint-shape");
    let mut net = BdqNetwork::new(n_nodes, edges, n_actions, &arch, &mut scratch);
    if net.n_params() != n_params {
        return Err(NeuralError::Checkpoint(format!(
            "parameter count {} does not match architecture ({})",
            n_params,
            net.n_params()
        )));
    }
    for p in net.online.iter_mut() {
        *p = c.f64()?;
    }
    for p in net.target.iter_mut() {
        *p = c.f64()?;
    }
    if c.pos != bytes.len() {
        return Err(NeuralError::Checkpoint("trailing bytes".into()));
    }
    Ok((net, fingerprint))
}

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_widths(buf: &mut Vec<u8>, widths: &[usize]) {
    put_u32(buf, widths.len() as u32);
    for &w in widths {
        put_u32(buf, w as u32);
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NeuralError> {
        if self.pos + n > self.bytes.len() {
            return Err(NeuralError::Checkpoint("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, NeuralError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NeuralError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, NeuralError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn widths(&mut self) -> Result<Vec<usize>, NeuralError> {
        let n = self.u32()? as usize;
        if n > 64 {
            return Err(NeuralError::Checkpoint("implausible layer count".into()));
        }
        (0..n).map(|_| Ok(self.u32()? as usize)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net() -> BdqNetwork {
        let arch = BdqArch {
            conv_widths: vec![2, 3],
            kernel_hidden: 4,
            trunk_widths: vec![6, 5],
            head_hidden: vec![4],
            branches: 3,
        };
        let mut rng = RngStream::new(77, "ckpt");
        BdqNetwork::new(3, vec![(0, 1), (1, 2), (2, 0)], 4, &arch, &mut rng)
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.bin");
        let mut net = tiny_net();
        net.target[0] = -12.5; // make online and target differ
        save_checkpoint(&path, &net, 0xDEADBEEF).unwrap();
        let (loaded, fp) = load_checkpoint(&path).unwrap();
        assert_eq!(fp, 0xDEADBEEF);
        assert_eq!(loaded.online, net.online);
        assert_eq!(loaded.target, net.target);
        assert_eq!(loaded.arch(), net.arch());
        assert_eq!(loaded.edges(), net.edges());
        assert_eq!(loaded.n_actions(), net.n_actions());
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        fs::write(&path, b"NOPE....").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(NeuralError::Checkpoint(_))
        ));
    }

    #[test]
    fn truncation_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.bin");
        let net = tiny_net();
        save_checkpoint(&path, &net, 1).unwrap();
        let bytes = fs::read(&path).unwrap();
        fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(NeuralError::Checkpoint(_))
        ));
    }
}
