//! Binary checkpoint container.
//!
//! Layout (little-endian): `"MIRP"`, format version `u32`, 32-byte config
//! hash, tensor count `u32`, then per tensor: name length `u32`, UTF-8 name,
//! rank `u32`, dims as `u64`, values as `f64`.

use std::path::Path;

use super::adam::{Adam, AdamConfig};
use super::model::{Model, Param};
use super::train::TrainState;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"MIRP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: [u8; 32],
    pub tensors: Vec<NamedTensor>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(format!("checkpoint: {}", msg.into()))
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(bad(format!("truncated at byte {} (wanted {n} more)", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

impl Checkpoint {
    pub fn get(&self, name: &str) -> Option<&NamedTensor> {
        self.tensors.iter().find(|t| t.name == name)
    }

    fn require(&self, name: &str) -> Result<&NamedTensor> {
        self.get(name).ok_or_else(|| bad(format!("missing tensor '{name}'")))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.config_hash);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            out.extend_from_slice(&(t.name.len() as u32).to_le_bytes());
            out.extend_from_slice(t.name.as_bytes());
            out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
            for &d in &t.shape {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for &v in &t.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = r.u32()?;
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let config_hash: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let count = r.u32()? as usize;
        let mut tensors = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let name_len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(name_len)?)
                .map_err(|_| bad("tensor name is not UTF-8"))?
                .to_string();
            let rank = r.u32()? as usize;
            if rank > 8 {
                return Err(bad(format!("tensor '{name}' has implausible rank {rank}")));
            }
            let mut shape = Vec::with_capacity(rank);
            let mut n: usize = 1;
            for _ in 0..rank {
                let d = usize::try_from(r.u64()?).map_err(|_| bad("dimension overflow"))?;
                n = n.checked_mul(d).ok_or_else(|| bad("dimension overflow"))?;
                shape.push(d);
            }
            if n.checked_mul(8).is_none_or(|b| b > r.remaining()) {
                return Err(bad(format!("truncated values for tensor '{name}'")));
            }
            let values = r
                .take(n * 8)?
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            tensors.push(NamedTensor { name, shape, values });
        }
        if r.remaining() != 0 {
            return Err(bad(format!("{} trailing bytes", r.remaining())));
        }
        Ok(Self { config_hash, tensors })
    }
}

pub fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    std::fs::write(path, ck.to_bytes())?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&std::fs::read(path)?)
}

fn named<T: Scalar>(name: String, shape: &[usize], values: &[T]) -> NamedTensor {
    NamedTensor { name, shape: shape.to_vec(), values: values.iter().map(|v| v.as_f64()).collect() }
}

fn to_tensor<T: Scalar>(t: &NamedTensor) -> Result<Tensor<T>> {
    Tensor::from_vec(&t.shape, t.values.iter().map(|&v| T::lit(v)).collect())
}

impl<T: Scalar> TrainState<T> {
    pub fn to_checkpoint(&self, config_hash: [u8; 32]) -> Checkpoint {
        let mut tensors = vec![named("model.spec".into(), &[11], &self.model.encode_spec())];
        for p in self.model.params() {
            tensors.push(named(p.name.clone(), p.tensor.shape(), p.tensor.data()));
        }
        for (p, (m, v)) in self.model.params().iter().zip(self.optimizer.m.iter().zip(&self.optimizer.v)) {
            tensors.push(named(format!("adam.m/{}", p.name), p.tensor.shape(), m));
            tensors.push(named(format!("adam.v/{}", p.name), p.tensor.shape(), v));
        }
        let c = self.optimizer.config;
        tensors.push(named("adam.config".into(), &[4], &[c.lr, c.beta1, c.beta2, c.eps]));
        let counters = [
            self.optimizer.step as f64,
            self.epoch as f64,
            (self.seed >> 32) as f64,
            (self.seed & 0xffff_ffff) as f64,
        ];
        tensors.push(named("state.counters".into(), &[4], &counters));
        Checkpoint { config_hash, tensors }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let (spec, decay) = Model::<T>::decode_spec(&ck.require("model.spec")?.values)?;
        let names: Vec<String> = Model::<T>::new(spec.clone(), decay, 0)?
            .params()
            .iter()
            .map(|p| p.name.clone())
            .collect();
        let params = names
            .iter()
            .map(|n| Ok(Param { name: n.clone(), tensor: to_tensor(ck.require(n)?)? }))
            .collect::<Result<Vec<_>>>()?;
        let model = Model::from_parts(spec, decay, params)?;
        let cfg = &ck.require("adam.config")?.values;
        if cfg.len() != 4 {
            return Err(bad("malformed optimizer config"));
        }
        let config = AdamConfig { lr: cfg[0], beta1: cfg[1], beta2: cfg[2], eps: cfg[3] };
        let mut optimizer = Adam::new(config, model.params());
        for (i, n) in names.iter().enumerate() {
            optimizer.m[i] = to_tensor::<T>(ck.require(&format!("adam.m/{n}"))?)?.into_vec();
            optimizer.v[i] = to_tensor::<T>(ck.require(&format!("adam.v/{n}"))?)?.into_vec();
            if optimizer.m[i].len() != model.params()[i].tensor.len()
                || optimizer.v[i].len() != model.params()[i].tensor.len()
            {
                return Err(bad(format!("optimizer moments for '{n}' have the wrong size")));
            }
        }
        let c = &ck.require("state.counters")?.values;
        if c.len() != 4 {
            return Err(bad("malformed state counters"));
        }
        optimizer.step = c[0] as u64;
        let seed = ((c[2] as u64) << 32) | (c[3] as u64);
        Ok(Self { model, optimizer, epoch: c[1] as u64, seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{FrontEnd, ModelSpec};

    fn state() -> TrainState<f64> {
        let spec = ModelSpec { scale: 16, modes: 2, ..ModelSpec::new(FrontEnd::Mirp, 1, 30, 5, 3) };
        let mut s = TrainState::new(Model::new(spec, 0.37, 4).unwrap(), AdamConfig::default(), u64::MAX - 5);
        s.epoch = 7;
        s.optimizer.step = 123;
        s.optimizer.m[0][0] = 0.125;
        s
    }

    #[test]
    fn round_trip_is_exact() {
        let s = state();
        let ck = s.to_checkpoint([7u8; 32]);
        let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
        assert_eq!(back, ck);
        let restored = TrainState::<f64>::from_checkpoint(&back).unwrap();
        assert_eq!(restored, s);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let bytes = state().to_checkpoint([0u8; 32]).to_bytes();
        for cut in [0, 3, 8, 40, 45, bytes.len() - 1] {
            assert!(Checkpoint::from_bytes(&bytes[..cut]).is_err());
        }
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(Checkpoint::from_bytes(&wrong).is_err());
        let mut version = bytes.clone();
        version[4] = 9;
        assert!(Checkpoint::from_bytes(&version).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(Checkpoint::from_bytes(&extra).is_err());
    }
}
