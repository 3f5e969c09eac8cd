//! Versioned binary agent snapshots.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   8 bytes  "HERDAGNT"
//! version u32      currently 1
//! dims    u32 x 3  state, action, goal
//! config  u32 hidden count, u32 x count hidden widths, f64 x 9 knobs
//! nets    4 x { u32 size count, u32 x count sizes, u8 head,
//!               u64 param count, f64 x count params (row-major, as laid
//!               out in `mlp`) }       order: actor, critic, target actor,
//!                                     target critic
//! norms   2 x { u32 dim, f64 floor, f64 clip, f64 count,
//!               f64 x dim sum, f64 x dim sum-of-squares }
//!                                     order: observation, goal
//! ```
//!
//! Optimizer moments are deliberately not stored: a snapshot reproduces the
//! *policy* (and evaluation) bit-for-bit; resumed training restarts Adam.

use alloc::string::String;
use alloc::vec::Vec;

use crate::agent::mlp::{Head, Mlp};
use crate::agent::{AgentConfig, DdpgAgent, Normalizer};
use crate::types::EnvDims;
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"HERDAGNT";
const VERSION: u32 = 1;

pub fn encode(agent: &DdpgAgent) -> Vec<u8> {
    let (dims, cfg, nets, norms) = agent.parts();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, VERSION);
    put_u32(&mut out, dims.state as u32);
    put_u32(&mut out, dims.action as u32);
    put_u32(&mut out, dims.goal as u32);

    put_u32(&mut out, cfg.hidden.len() as u32);
    for h in &cfg.hidden {
        put_u32(&mut out, *h as u32);
    }
    for v in [
        cfg.actor_lr,
        cfg.critic_lr,
        cfg.gamma,
        cfg.polyak,
        cfg.action_noise,
        cfg.random_action_prob,
        cfg.action_l2,
        cfg.normalizer_floor,
        cfg.normalizer_clip,
    ] {
        put_f64(&mut out, v);
    }

    for net in nets {
        put_u32(&mut out, net.sizes().len() as u32);
        for s in net.sizes() {
            put_u32(&mut out, *s as u32);
        }
        out.push(match net.head() {
            Head::Tanh => 0,
            Head::Identity => 1,
        });
        put_u64(&mut out, net.params().len() as u64);
        for p in net.params() {
            put_f64(&mut out, *p);
        }
    }

    for norm in norms {
        let (count, sum, sumsq) = norm.raw();
        put_u32(&mut out, norm.dim() as u32);
        put_f64(&mut out, norm.floor);
        put_f64(&mut out, norm.clip);
        put_f64(&mut out, count);
        for v in sum {
            put_f64(&mut out, *v);
        }
        for v in sumsq {
            put_f64(&mut out, *v);
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DdpgAgent> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(8)?;
    if magic != MAGIC {
        return Err(bad("wrong magic; not an agent snapshot"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(bad(alloc::format!("unsupported snapshot version {version}")));
    }
    let dims = EnvDims {
        state: r.u32()? as usize,
        action: r.u32()? as usize,
        goal: r.u32()? as usize,
    };

    let hidden_len = r.u32()? as usize;
    if hidden_len > 64 {
        return Err(bad("implausible hidden layer count"));
    }
    let mut hidden = Vec::with_capacity(hidden_len);
    for _ in 0..hidden_len {
        hidden.push(r.u32()? as usize);
    }
    let cfg = AgentConfig {
        hidden,
        actor_lr: r.f64()?,
        critic_lr: r.f64()?,
        gamma: r.f64()?,
        polyak: r.f64()?,
        action_noise: r.f64()?,
        random_action_prob: r.f64()?,
        action_l2: r.f64()?,
        normalizer_floor: r.f64()?,
        normalizer_clip: r.f64()?,
    };
    cfg.validate().map_err(|e| bad(alloc::format!("config out of range: {e}")))?;

    let mut nets = Vec::with_capacity(4);
    for _ in 0..4 {
        let n_sizes = r.u32()? as usize;
        if !(2..=66).contains(&n_sizes) {
            return Err(bad("implausible layer count"));
        }
        let mut sizes = Vec::with_capacity(n_sizes);
        for _ in 0..n_sizes {
            sizes.push(r.u32()? as usize);
        }
        let head = match r.u8()? {
            0 => Head::Tanh,
            1 => Head::Identity,
            t => return Err(bad(alloc::format!("unknown head tag {t}"))),
        };
        let n_params = r.u64()? as usize;
        let mut params = Vec::with_capacity(n_params);
        for _ in 0..n_params {
            params.push(r.f64()?);
        }
        nets.push(
            Mlp::from_params(sizes, head, params)
                .ok_or_else(|| bad("network shape and parameter count disagree"))?,
        );
    }
    let nets: [Mlp; 4] = nets.try_into().expect("exactly four networks read");

    let mut norms = Vec::with_capacity(2);
    for _ in 0..2 {
        let dim = r.u32()? as usize;
        let floor = r.f64()?;
        let clip = r.f64()?;
        let count = r.f64()?;
        let mut sum = Vec::with_capacity(dim);
        for _ in 0..dim {
            sum.push(r.f64()?);
        }
        let mut sumsq = Vec::with_capacity(dim);
        for _ in 0..dim {
            sumsq.push(r.f64()?);
        }
        norms.push(
            Normalizer::from_raw(dim, floor, clip, count, sum, sumsq)
                .ok_or_else(|| bad("normalizer shape mismatch"))?,
        );
    }
    let norms: [Normalizer; 2] = norms.try_into().expect("exactly two normalizers read");

    if r.pos != bytes.len() {
        return Err(bad("trailing bytes after snapshot"));
    }

    // Cross-check the advertised dimensions against the actor's layout.
    if nets[0].input_dim() != dims.state + dims.goal || nets[0].output_dim() != dims.action {
        return Err(bad("actor shape disagrees with recorded dimensions"));
    }
    if nets[1].input_dim() != dims.state + dims.action + dims.goal {
        return Err(bad("critic shape disagrees with recorded dimensions"));
    }

    Ok(DdpgAgent::from_parts(dims, cfg, nets, norms))
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadSnapshot(msg.into())
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(bad("truncated snapshot"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
