use serde::{Deserialize, Serialize};

use crate::{Result, SignalError};

/// Name and physical unit of one channel, e.g. `("x", "m")`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub unit: String,
}

impl Channel {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Channel {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// Uniformly sampled multi-channel signal. All channels share the sample
/// period `dt` and the start time `t0`, and have identical length.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    t0: f64,
    channels: Vec<Channel>,
    data: Vec<Vec<f64>>,
}

impl TimeSeries {
    /// Builds a series, enforcing: `dt > 0`, equal channel lengths, at least
    /// one sample, and finite values throughout.
    pub fn new(dt: f64, t0: f64, channels: Vec<Channel>, data: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SignalError::InvalidDt(dt));
        }
        assert_eq!(
            channels.len(),
            data.len(),
            "channel metadata and data column counts must match"
        );
        let len = data.first().map(Vec::len).unwrap_or(0);
        if len == 0 {
            return Err(SignalError::EmptySignal);
        }
        for (ch, col) in channels.iter().zip(&data) {
            if col.len() != len {
                return Err(SignalError::LengthMismatch {
                    channel: ch.name.clone(),
                    len: col.len(),
                    expected: len,
                });
            }
            if let Some(index) = col.iter().position(|v| !v.is_finite()) {
                return Err(SignalError::NonFiniteSample {
                    channel: ch.name.clone(),
                    index,
                });
            }
        }
        Ok(TimeSeries {
            dt,
            t0,
            channels,
            data,
        })
    }

    /// Single-channel convenience constructor with `t0 = 0`.
    pub fn single(dt: f64, name: &str, unit: &str, samples: Vec<f64>) -> Result<Self> {
        TimeSeries::new(dt, 0.0, vec![Channel::new(name, unit)], vec![samples])
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.data[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty signals
    }

    pub fn duration(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_data(&self, idx: usize) -> &[f64] {
        &self.data[idx]
    }

    /// Looks a channel up by name.
    pub fn channel_by_name(&self, name: &str) -> Result<&[f64]> {
        self.channels
            .iter()
            .position(|c| c.name == name)
            .map(|i| self.data[i].as_slice())
            .ok_or_else(|| SignalError::NoSuchChannel(name.to_string()))
    }

    /// Extracts one channel as a new single-channel series.
    pub fn extract(&self, name: &str) -> Result<TimeSeries> {
        let samples = self.channel_by_name(name)?.to_vec();
        let ch = self
            .channels
            .iter()
            .find(|c| c.name == name)
            .expect("checked above")
            .clone();
        TimeSeries::new(self.dt, self.t0, vec![ch], vec![samples])
    }

    /// Requires exactly one channel and returns its samples.
    pub fn require_single(&self) -> Result<&[f64]> {
        if self.num_channels() != 1 {
            return Err(SignalError::NotSingleChannel(self.num_channels()));
        }
        Ok(&self.data[0])
    }

    /// Sample instants `t0 + k*dt`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        let (t0, dt) = (self.t0, self.dt);
        (0..self.len()).map(move |k| t0 + k as f64 * dt)
    }
}

/// Structured origin of a stored signal: which system produced it, with what
/// seed and parameters, how much measurement noise was injected, and whether
/// it has been through the fusion filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub system: String,
    pub seed: u64,
    #[serde(default)]
    pub params: serde_json::Value,
    pub noise_ratio: f64,
    pub filtered: bool,
}

impl Provenance {
    pub fn synthetic(system: &str, seed: u64, noise_ratio: f64) -> Self {
        Provenance {
            system: system.to_string(),
            seed,
            params: serde_json::Value::Null,
            noise_ratio,
            filtered: false,
        }
    }
}

/// A signal together with its model-class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSignal {
    pub signal: TimeSeries,
    pub label: String,
    pub provenance: Provenance,
}

impl LabeledSignal {
    pub fn new(signal: TimeSeries, label: impl Into<String>, provenance: Provenance) -> Self {
        LabeledSignal {
            signal,
            label: label.into(),
            provenance,
        }
    }
}
