//! Model parameters: flat storage, seeded initialization, checkpoint format.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{feature_schema_hash, FeatureMode, CLAUSE_FEATURES, LITERAL_FEATURES};

use super::CheckpointError;

/// Directed relation types of the tripartite graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    PosToClause = 0,
    NegToClause = 1,
    ClauseToPos = 2,
    ClauseToNeg = 3,
    PosToNeg = 4,
    NegToPos = 5,
}

pub const RELATIONS: [Relation; 6] = [
    Relation::PosToClause,
    Relation::NegToClause,
    Relation::ClauseToPos,
    Relation::ClauseToNeg,
    Relation::PosToNeg,
    Relation::NegToPos,
];

impl Relation {
    fn name(self) -> &'static str {
        match self {
            Relation::PosToClause => "pos_clause",
            Relation::NegToClause => "neg_clause",
            Relation::ClauseToPos => "clause_pos",
            Relation::ClauseToNeg => "clause_neg",
            Relation::PosToNeg => "pos_neg",
            Relation::NegToPos => "neg_pos",
        }
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    /// Hidden width of node embeddings.
    pub hidden: usize,
    /// Number of convolution rounds.
    pub layers: usize,
    /// Portfolio size.
    pub num_solvers: usize,
    /// Share one convolution matrix across all relations per layer.
    pub homogeneous: bool,
    /// Feature definition the model was (or will be) trained against.
    pub feature_mode: FeatureMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            layers: 2,
            num_solvers: 2,
            homogeneous: false,
            feature_mode: FeatureMode::CustomPlusPe,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TensorSpec {
    name: String,
    dims: Vec<usize>,
    offset: usize,
}

impl TensorSpec {
    fn len(&self) -> usize {
        self.dims.iter().product()
    }
}

fn build_layout(cfg: &ModelConfig) -> Vec<TensorSpec> {
    let h = cfg.hidden;
    let mut specs = Vec::new();
    let mut offset = 0;
    let mut push = |name: String, dims: Vec<usize>, specs: &mut Vec<TensorSpec>| {
        let spec = TensorSpec { name, dims, offset };
        offset += spec.len();
        specs.push(spec);
    };

    for (ty, in_dim) in [
        ("clause", CLAUSE_FEATURES),
        ("pos", LITERAL_FEATURES),
        ("neg", LITERAL_FEATURES),
    ] {
        push(format!("embed_w.{ty}"), vec![in_dim, h], &mut specs);
        push(format!("embed_b.{ty}"), vec![h], &mut specs);
    }
    for l in 0..cfg.layers {
        if cfg.homogeneous {
            push(format!("conv_w.{l}.shared"), vec![h, h], &mut specs);
        } else {
            for rel in RELATIONS {
                push(format!("conv_w.{l}.{}", rel.name()), vec![h, h], &mut specs);
            }
        }
        for ty in ["clause", "pos", "neg"] {
            push(format!("conv_b.{l}.{ty}"), vec![h], &mut specs);
        }
    }
    push("head_w".into(), vec![3 * h, cfg.num_solvers], &mut specs);
    push("head_b".into(), vec![cfg.num_solvers], &mut specs);
    specs
}

/// All learnable tensors in one flat f64 vector, laid out per
/// [`build_layout`]. Every element is exactly representable as f32, which
/// makes checkpoint serialization lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    cfg: ModelConfig,
    feature_schema: u64,
    layout: Vec<TensorSpec>,
    data: Vec<f64>,
}

/// Round to f32 precision; keeps the f32-representable invariant.
pub(crate) fn quantize(x: f64) -> f64 {
    x as f32 as f64
}

impl ModelParameters {
    /// Seeded uniform(±1/sqrt(fan_in)) initialization.
    pub fn init(cfg: ModelConfig, seed: u64) -> Self {
        assert!(cfg.hidden >= 1 && cfg.num_solvers >= 1, "degenerate config");
        let layout = build_layout(&cfg);
        let total: usize = layout.iter().map(|s| s.len()).sum();
        let mut data = vec![0.0; total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = cfg.hidden;
        for spec in &layout {
            let fan_in = if spec.name.starts_with("embed") {
                // Bias fan-in matches its weight's input width.
                if spec.name.contains("clause") {
                    CLAUSE_FEATURES
                } else {
                    LITERAL_FEATURES
                }
            } else if spec.name.starts_with("conv") {
                h
            } else {
                3 * h
            };
            let bound = 1.0 / (fan_in as f64).sqrt();
            for slot in &mut data[spec.offset..spec.offset + spec.len()] {
                *slot = quantize(rng.gen_range(-bound..bound));
            }
        }
        Self {
            cfg,
            feature_schema: feature_schema_hash(cfg.feature_mode),
            layout,
            data,
        }
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn hidden(&self) -> usize {
        self.cfg.hidden
    }

    pub fn layers(&self) -> usize {
        self.cfg.layers
    }

    pub fn num_solvers(&self) -> usize {
        self.cfg.num_solvers
    }

    pub fn feature_mode(&self) -> FeatureMode {
        self.cfg.feature_mode
    }

    pub fn feature_schema(&self) -> u64 {
        self.feature_schema
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Mutable access for the optimizer; the caller must keep values
    /// f32-representable (see [`quantize`]).
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn tensor_named(&self, name: &str) -> &TensorSpec {
        self.layout
            .iter()
            .find(|s| s.name == name)
            .unwrap_or_else(|| panic!("no tensor {name}"))
    }

    pub(crate) fn slice(&self, name: &str) -> &[f64] {
        let spec = self.tensor_named(name);
        &self.data[spec.offset..spec.offset + spec.len()]
    }

    pub(crate) fn offset_len(&self, name: &str) -> (usize, usize) {
        let spec = self.tensor_named(name);
        (spec.offset, spec.len())
    }

    pub fn embed_w(&self, ty: &str) -> &[f64] {
        self.slice(&format!("embed_w.{ty}"))
    }

    pub fn embed_b(&self, ty: &str) -> &[f64] {
        self.slice(&format!("embed_b.{ty}"))
    }

    /// Convolution matrix for a relation; in homogeneous mode every relation
    /// resolves to the layer's shared matrix.
    pub fn conv_w(&self, layer: usize, rel: Relation) -> &[f64] {
        if self.cfg.homogeneous {
            self.slice(&format!("conv_w.{layer}.shared"))
        } else {
            self.slice(&format!("conv_w.{layer}.{}", rel.name()))
        }
    }

    pub(crate) fn conv_w_offset(&self, layer: usize, rel: Relation) -> usize {
        let name = if self.cfg.homogeneous {
            format!("conv_w.{layer}.shared")
        } else {
            format!("conv_w.{layer}.{}", rel.name())
        };
        self.offset_len(&name).0
    }

    pub fn conv_b(&self, layer: usize, ty: &str) -> &[f64] {
        self.slice(&format!("conv_b.{layer}.{ty}"))
    }

    pub fn head_w(&self) -> &[f64] {
        self.slice("head_w")
    }

    pub fn head_b(&self) -> &[f64] {
        self.slice("head_b")
    }

    /// Test/setup helper: overwrite one tensor.
    pub fn set_tensor(&mut self, name: &str, values: &[f64]) {
        let (offset, len) = self.offset_len(name);
        assert_eq!(values.len(), len, "tensor {name} size mismatch");
        for (dst, &v) in self.data[offset..offset + len].iter_mut().zip(values) {
            *dst = quantize(v);
        }
    }

    pub fn tensor_names(&self) -> Vec<String> {
        self.layout.iter().map(|s| s.name.clone()).collect()
    }
}

const MAGIC: &[u8; 4] = b"GRSS";
const FORMAT_VERSION: u16 = 1;

const FLAG_HOMOGENEOUS: u32 = 1;

fn mode_to_code(mode: FeatureMode) -> u32 {
    match mode {
        FeatureMode::CustomPlusPe => 0,
        FeatureMode::CustomNoPe => 1,
        FeatureMode::Random { .. } => 2,
        FeatureMode::NodeTypeOneHot => 3,
    }
}

fn mode_from_code(code: u32, seed: u64) -> Result<FeatureMode, CheckpointError> {
    Ok(match code {
        0 => FeatureMode::CustomPlusPe,
        1 => FeatureMode::CustomNoPe,
        2 => FeatureMode::Random { seed },
        3 => FeatureMode::NodeTypeOneHot,
        _ => return Err(CheckpointError::Corrupt(format!("feature mode {code}"))),
    })
}

/// Binary checkpoint layout (all integers little-endian):
/// magic `GRSS`, format version u16, feature-schema hash u64, hidden u32,
/// layers u32, solvers u32, flags u32 (bit 0 homogeneous, bits 8..10 feature
/// mode), feature seed u64, tensor count u32, then per tensor: name length
/// u16 + UTF-8 name, rank u8, dims u32 each, values as f32.
pub fn save_checkpoint(params: &ModelParameters) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&params.feature_schema.to_le_bytes());
    out.extend_from_slice(&(params.cfg.hidden as u32).to_le_bytes());
    out.extend_from_slice(&(params.cfg.layers as u32).to_le_bytes());
    out.extend_from_slice(&(params.cfg.num_solvers as u32).to_le_bytes());
    let mut flags = 0u32;
    if params.cfg.homogeneous {
        flags |= FLAG_HOMOGENEOUS;
    }
    flags |= mode_to_code(params.cfg.feature_mode) << 8;
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&params.cfg.feature_mode.seed().to_le_bytes());
    out.extend_from_slice(&(params.layout.len() as u32).to_le_bytes());
    for spec in &params.layout {
        out.extend_from_slice(&(spec.name.len() as u16).to_le_bytes());
        out.extend_from_slice(spec.name.as_bytes());
        out.push(spec.dims.len() as u8);
        for &d in &spec.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &params.data[spec.offset..spec.offset + spec.len()] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.at + n > self.buf.len() {
            return Err(CheckpointError::Corrupt("truncated".into()));
        }
        let s = &self.buf[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, CheckpointError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn load_checkpoint(bytes: &[u8]) -> Result<ModelParameters, CheckpointError> {
    let mut r = Reader { buf: bytes, at: 0 };
    if r.take(4)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let feature_schema = r.u64()?;
    let hidden = r.u32()? as usize;
    let layers = r.u32()? as usize;
    let num_solvers = r.u32()? as usize;
    let flags = r.u32()?;
    let feature_seed = r.u64()?;
    let feature_mode = mode_from_code((flags >> 8) & 0b11, feature_seed)?;
    let cfg = ModelConfig {
        hidden,
        layers,
        num_solvers,
        homogeneous: flags & FLAG_HOMOGENEOUS != 0,
        feature_mode,
    };
    if hidden == 0 || num_solvers == 0 {
        return Err(CheckpointError::Corrupt("degenerate dimensions".into()));
    }
    let layout = build_layout(&cfg);
    let n_tensors = r.u32()? as usize;
    if n_tensors != layout.len() {
        return Err(CheckpointError::Corrupt(format!(
            "expected {} tensors, file has {n_tensors}",
            layout.len()
        )));
    }
    let total: usize = layout.iter().map(|s| s.len()).sum();
    let mut data = vec![0.0; total];
    for spec in &layout {
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| CheckpointError::Corrupt("tensor name".into()))?;
        if name != spec.name {
            return Err(CheckpointError::Corrupt(format!(
                "expected tensor {:?}, found {name:?}",
                spec.name
            )));
        }
        let rank = r.u8()? as usize;
        if rank != spec.dims.len() {
            return Err(CheckpointError::Corrupt(format!("tensor {name} rank")));
        }
        for &want in &spec.dims {
            if r.u32()? as usize != want {
                return Err(CheckpointError::Corrupt(format!("tensor {name} dims")));
            }
        }
        for slot in &mut data[spec.offset..spec.offset + spec.len()] {
            *slot = r.f32()? as f64;
        }
    }
    if r.at != bytes.len() {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }
    Ok(ModelParameters {
        cfg,
        feature_schema,
        layout,
        data,
    })
}

pub fn save_checkpoint_file(
    params: &ModelParameters,
    path: &std::path::Path,
) -> Result<(), CheckpointError> {
    std::fs::write(path, save_checkpoint(params))?;
    Ok(())
}

pub fn load_checkpoint_file(path: &std::path::Path) -> Result<ModelParameters, CheckpointError> {
    load_checkpoint(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ModelConfig {
        ModelConfig {
            hidden: 4,
            layers: 2,
            num_solvers: 3,
            homogeneous: false,
            feature_mode: FeatureMode::CustomPlusPe,
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = ModelParameters::init(small_cfg(), 7);
        let b = ModelParameters::init(small_cfg(), 7);
        assert_eq!(a, b);
        let c = ModelParameters::init(small_cfg(), 8);
        assert_ne!(a, c);
        // Largest fan-in bound is 1/sqrt(3) for literal embeddings.
        assert!(a.data().iter().all(|v| v.abs() <= 1.0 / (3f64).sqrt()));
        // All values f32-representable.
        assert!(a.data().iter().all(|&v| v == quantize(v)));
    }

    #[test]
    fn homogeneous_layout_shares_conv_weights() {
        let cfg = ModelConfig { homogeneous: true, ..small_cfg() };
        let p = ModelParameters::init(cfg, 1);
        let w0 = p.conv_w(0, Relation::PosToClause).to_vec();
        for rel in RELATIONS {
            assert_eq!(p.conv_w(0, rel), &w0[..]);
            assert_eq!(p.conv_w_offset(0, rel), p.conv_w_offset(0, Relation::PosToClause));
        }
        let hetero = ModelParameters::init(small_cfg(), 1);
        assert!(hetero.len() > p.len());
    }

    #[test]
    fn checkpoint_round_trip_is_byte_identical() {
        let p = ModelParameters::init(small_cfg(), 42);
        let bytes = save_checkpoint(&p);
        let q = load_checkpoint(&bytes).unwrap();
        assert_eq!(p, q);
        assert_eq!(save_checkpoint(&q), bytes);
    }

    #[test]
    fn checkpoint_preserves_flags_and_modes() {
        for (homogeneous, mode) in [
            (true, FeatureMode::CustomPlusPe),
            (false, FeatureMode::CustomNoPe),
            (true, FeatureMode::Random { seed: 99 }),
            (false, FeatureMode::NodeTypeOneHot),
        ] {
            let cfg = ModelConfig { homogeneous, feature_mode: mode, ..small_cfg() };
            let p = ModelParameters::init(cfg, 5);
            let q = load_checkpoint(&save_checkpoint(&p)).unwrap();
            assert_eq!(q.config().homogeneous, homogeneous);
            assert_eq!(q.config().feature_mode, mode);
            assert_eq!(p, q);
        }
    }

    #[test]
    fn checkpoint_rejects_garbage() {
        assert!(matches!(load_checkpoint(b"nope"), Err(CheckpointError::BadMagic)));
        let p = ModelParameters::init(small_cfg(), 1);
        let mut bytes = save_checkpoint(&p);
        bytes[4] = 9; // version
        assert!(matches!(
            load_checkpoint(&bytes),
            Err(CheckpointError::UnsupportedVersion(_))
        ));
        let bytes = save_checkpoint(&p);
        assert!(load_checkpoint(&bytes[..bytes.len() - 2]).is_err());
    }

    #[test]
    fn set_tensor_quantizes() {
        let mut p = ModelParameters::init(small_cfg(), 1);
        p.set_tensor("head_b", &[0.1f64 + 1e-12, 0.2, 0.3]);
        assert_eq!(p.head_b()[0], 0.1f32 as f64);
    }
}
