//! Canonical data model: per-patient 1 Hz multichannel series with
//! per-factor annotation intervals, plus normalization, target
//! construction and event-based segment extraction.

mod io;

pub use io::{load_dataset, save_dataset};

use crate::error::{Error, Result};

/// The four monitored channels, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Hr,
    SysAbp,
    DiaAbp,
    SysIcp,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 4] = [
        ChannelKind::Hr,
        ChannelKind::SysAbp,
        ChannelKind::DiaAbp,
        ChannelKind::SysIcp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Hr => "hr",
            ChannelKind::SysAbp => "sys_abp",
            ChannelKind::DiaAbp => "dia_abp",
            ChannelKind::SysIcp => "sys_icp",
        }
    }

    pub fn parse(s: &str) -> Option<ChannelKind> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn index(self) -> usize {
        match self {
            ChannelKind::Hr => 0,
            ChannelKind::SysAbp => 1,
            ChannelKind::DiaAbp => 2,
            ChannelKind::SysIcp => 3,
        }
    }
}

/// Annotated event classes. Stable periods are the absence of any
/// annotation, not a fifth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// Blood sample: arterial-line draw corrupting the ABP reading.
    Bs,
    /// Damped trace: degraded pressure waveform with narrowed pulse pressure.
    Dt,
    /// Endotracheal suctioning: perturbs HR and ICP.
    Sc,
    /// Catch-all for every other annotation.
    X,
}

impl Factor {
    pub const ALL: [Factor; 4] = [Factor::Bs, Factor::Dt, Factor::Sc, Factor::X];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Bs => "BS",
            Factor::Dt => "DT",
            Factor::Sc => "SC",
            Factor::X => "X",
        }
    }

    pub fn parse(s: &str) -> Option<Factor> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }
}

impl std::fmt::Display for Factor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One channel of 1 Hz samples. Units are bpm for HR, mmHg for pressures.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub kind: ChannelKind,
    pub samples: Vec<f64>,
}

/// Half-open annotated interval `[start, end)` for one factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnotationInterval {
    pub factor: Factor,
    pub start: usize,
    pub end: usize,
}

impl AnnotationInterval {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// A patient's full record: four equal-length channels plus annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    pub patient_id: String,
    /// Indexed by `ChannelKind::index()`.
    pub channels: [Channel; 4],
    pub annotations: Vec<AnnotationInterval>,
}

impl PatientRecord {
    /// Validates all record invariants: equal channel lengths, finite
    /// samples, in-bounds non-overlapping same-factor intervals.
    pub fn new(
        patient_id: String,
        channels: [Channel; 4],
        annotations: Vec<AnnotationInterval>,
    ) -> Result<Self> {
        let len = channels[0].samples.len();
        for ch in &channels {
            if ch.samples.len() != len {
                return Err(Error::data(format!(
                    "patient {patient_id}: channel {} has {} samples, expected {len}",
                    ch.kind.name(),
                    ch.samples.len()
                )));
            }
            if let Some(i) = ch.samples.iter().position(|x| !x.is_finite()) {
                return Err(Error::data(format!(
                    "patient {patient_id}: channel {} sample {i} is not finite",
                    ch.kind.name()
                )));
            }
        }
        for a in &annotations {
            if a.start >= a.end || a.end > len {
                return Err(Error::data(format!(
                    "patient {patient_id}: annotation {} [{}, {}) out of order or out of bounds (record length {len})",
                    a.factor, a.start, a.end
                )));
            }
        }
        for factor in Factor::ALL {
            let mut spans: Vec<&AnnotationInterval> =
                annotations.iter().filter(|a| a.factor == factor).collect();
            spans.sort_by_key(|a| a.start);
            for pair in spans.windows(2) {
                if pair[1].start < pair[0].end {
                    return Err(Error::data(format!(
                        "patient {patient_id}: overlapping {factor} annotations [{}, {}) and [{}, {})",
                        pair[0].start, pair[0].end, pair[1].start, pair[1].end
                    )));
                }
            }
        }
        Ok(PatientRecord { patient_id, channels, annotations })
    }

    pub fn len(&self) -> usize {
        self.channels[0].samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, kind: ChannelKind) -> &[f64] {
        &self.channels[kind.index()].samples
    }

    pub fn annotations_of(&self, factor: Factor) -> Vec<AnnotationInterval> {
        let mut spans: Vec<AnnotationInterval> = self
            .annotations
            .iter()
            .copied()
            .filter(|a| a.factor == factor)
            .collect();
        spans.sort_by_key(|a| a.start);
        spans
    }
}

/// Channel normalization statistics. The blood-pressure pair shares one
/// mean/std computed over the pooled SysABP and DiaABP samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationStats {
    pub bp_mean: f64,
    pub bp_std: f64,
    pub hr_mean: f64,
    pub hr_std: f64,
    pub icp_mean: f64,
    pub icp_std: f64,
}

impl NormalizationStats {
    pub fn mean_std_for(&self, kind: ChannelKind) -> (f64, f64) {
        match kind {
            ChannelKind::Hr => (self.hr_mean, self.hr_std),
            ChannelKind::SysAbp | ChannelKind::DiaAbp => (self.bp_mean, self.bp_std),
            ChannelKind::SysIcp => (self.icp_mean, self.icp_std),
        }
    }
}

fn mean_and_population_std(pool: &str, values: impl Iterator<Item = f64> + Clone) -> Result<(f64, f64)> {
    let n = values.clone().count();
    if n == 0 {
        return Err(Error::data(format!("empty {pool} pool, cannot normalize")));
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    if std <= 0.0 {
        return Err(Error::data(format!(
            "zero variance in {pool} pool (constant data), cannot normalize"
        )));
    }
    Ok((mean, std))
}

/// Pooled statistics over the training records: SysABP and DiaABP share one
/// pool, HR and ICP get per-kind pools. Std is the population standard
/// deviation (divide by N).
pub fn compute_normalization(records: &[PatientRecord]) -> Result<NormalizationStats> {
    if records.is_empty() {
        return Err(Error::data("cannot compute normalization from zero records"));
    }
    for r in records {
        if r.is_empty() {
            return Err(Error::data(format!("patient {}: empty channels", r.patient_id)));
        }
    }
    let bp = records.iter().flat_map(|r| {
        r.channel(ChannelKind::SysAbp)
            .iter()
            .chain(r.channel(ChannelKind::DiaAbp))
            .copied()
    });
    let hr = records.iter().flat_map(|r| r.channel(ChannelKind::Hr).iter().copied());
    let icp = records.iter().flat_map(|r| r.channel(ChannelKind::SysIcp).iter().copied());

    let (bp_mean, bp_std) = mean_and_population_std("blood pressure", bp)?;
    let (hr_mean, hr_std) = mean_and_population_std("heart rate", hr)?;
    let (icp_mean, icp_std) = mean_and_population_std("icp", icp)?;
    Ok(NormalizationStats { bp_mean, bp_std, hr_mean, hr_std, icp_mean, icp_std })
}

/// `(x - mean) / std` per channel, with SysABP and DiaABP sharing the
/// pooled blood-pressure statistics.
pub fn apply_normalization(record: &PatientRecord, stats: &NormalizationStats) -> PatientRecord {
    let channels = record.channels.clone().map(|ch| {
        let (mean, std) = stats.mean_std_for(ch.kind);
        Channel {
            kind: ch.kind,
            samples: ch.samples.iter().map(|x| (x - mean) / std).collect(),
        }
    });
    PatientRecord {
        patient_id: record.patient_id.clone(),
        channels,
        annotations: record.annotations.clone(),
    }
}

/// Inverse of [`apply_normalization`].
pub fn undo_normalization(record: &PatientRecord, stats: &NormalizationStats) -> PatientRecord {
    let channels = record.channels.clone().map(|ch| {
        let (mean, std) = stats.mean_std_for(ch.kind);
        Channel {
            kind: ch.kind,
            samples: ch.samples.iter().map(|x| x * std + mean).collect(),
        }
    });
    PatientRecord {
        patient_id: record.patient_id.clone(),
        channels,
        annotations: record.annotations.clone(),
    }
}

/// One annotated event plus flanking context, the unit of training and
/// evaluation. Inputs carry all four channels; predictors route later.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSegment {
    pub patient_id: String,
    pub factor: Factor,
    /// Indexed by `ChannelKind::index()`, all the same length.
    pub inputs: [Vec<f64>; 4],
    /// 1 on the annotated interval, 0 in context. Same length as inputs.
    pub targets: Vec<u8>,
    /// Event location within the segment, half-open.
    pub event_span: (usize, usize),
    /// Segment start within the source record, for traceability.
    pub record_offset: usize,
}

impl EventSegment {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, kind: ChannelKind) -> &[f64] {
        &self.inputs[kind.index()]
    }
}

/// For each annotation of `factor` with length L, cuts `[start-L, end+L)`
/// clipped to record bounds. Targets are 1 exactly on the annotated
/// interval; annotations of other factors inside the context are ignored.
pub fn extract_event_segments(record: &PatientRecord, factor: Factor) -> Vec<EventSegment> {
    let len = record.len();
    record
        .annotations_of(factor)
        .into_iter()
        .map(|a| {
            let l = a.len();
            let seg_start = a.start.saturating_sub(l);
            let seg_end = (a.end + l).min(len);
            let inputs = [
                record.channels[0].samples[seg_start..seg_end].to_vec(),
                record.channels[1].samples[seg_start..seg_end].to_vec(),
                record.channels[2].samples[seg_start..seg_end].to_vec(),
                record.channels[3].samples[seg_start..seg_end].to_vec(),
            ];
            let mut targets = vec![0u8; seg_end - seg_start];
            for t in (a.start - seg_start)..(a.end - seg_start) {
                targets[t] = 1;
            }
            EventSegment {
                patient_id: record.patient_id.clone(),
                factor,
                inputs,
                targets,
                event_span: (a.start - seg_start, a.end - seg_start),
                record_offset: seg_start,
            }
        })
        .collect()
}

/// Shift targets `d` steps later: `out[t] = targets[t-d]`, zeros in front.
pub fn delay_targets(targets: &[u8], d: usize) -> Result<Vec<u8>> {
    if d >= targets.len() {
        return Err(Error::data(format!(
            "target delay {d} is not shorter than the sequence (length {})",
            targets.len()
        )));
    }
    let mut out = vec![0u8; targets.len()];
    out[d..].copy_from_slice(&targets[..targets.len() - d]);
    Ok(out)
}
