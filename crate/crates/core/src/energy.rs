//! Radio energy models and per-node energy accounting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EnergyError {
    #[error("{what} must be non-negative and finite (got {value})")]
    Negative { what: &'static str, value: f64 },
    #[error("zone residual {zone} exceeds cluster residual {cluster}")]
    ZoneExceedsCluster { zone: f64, cluster: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// First-order radio: free-space d^2 below `d0`, multipath d^4 at or above it.
    TwoRegime,
    /// Per-bit transmit/receive cost plus an amplifier term in d^2.
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioModel {
    pub kind: ModelKind,
    /// J/bit spent by transmitter and receiver electronics.
    pub e_elec: f64,
    /// J/bit/m^2, free-space amplifier.
    pub eps_fs: f64,
    /// J/bit/m^4, multipath amplifier.
    pub eps_mp: f64,
    /// Crossover distance between the two regimes, meters.
    pub d0: f64,
    pub e_trans: f64,
    pub e_amp: f64,
    pub e_recv: f64,
    /// Multiply the simple model's amplifier term by the message size.
    pub amp_per_bit: bool,
}

impl RadioModel {
    /// First-order radio constants commonly used for desk-scale experiments.
    pub fn physical() -> Self {
        let eps_fs = 10e-12;
        let eps_mp = 0.0013e-12;
        Self {
            kind: ModelKind::TwoRegime,
            e_elec: 50e-9,
            eps_fs,
            eps_mp,
            d0: (eps_fs / eps_mp).sqrt(),
            e_trans: 0.0,
            e_amp: 0.0,
            e_recv: 0.0,
            amp_per_bit: false,
        }
    }

    pub fn simple(e_trans: f64, e_amp: f64, e_recv: f64) -> Self {
        Self {
            kind: ModelKind::Simple,
            e_elec: 0.0,
            eps_fs: 0.0,
            eps_mp: 0.0,
            d0: 1.0,
            e_trans,
            e_amp,
            e_recv,
            amp_per_bit: false,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let constants = [
            ("energy.e_elec", self.e_elec),
            ("energy.eps_fs", self.eps_fs),
            ("energy.eps_mp", self.eps_mp),
            ("energy.e_trans", self.e_trans),
            ("energy.e_amp", self.e_amp),
            ("energy.e_recv", self.e_recv),
        ];
        for (key, value) in constants {
            if !(value >= 0.0 && value.is_finite()) {
                out.push(format!("{key} must be a finite value >= 0 (got {value})"));
            }
        }
        if self.kind == ModelKind::TwoRegime && !(self.d0 > 0.0 && self.d0.is_finite()) {
            out.push(format!("energy.d0 must be > 0 for the two_regime model (got {})", self.d0));
        }
        out
    }

    /// Energy to send `bits` over `d` meters.
    pub fn tx_energy(&self, bits: f64, d: f64) -> Result<f64, EnergyError> {
        non_negative("bits", bits)?;
        non_negative("distance", d)?;
        Ok(match self.kind {
            ModelKind::TwoRegime => {
                if d < self.d0 {
                    bits * self.e_elec + bits * self.eps_fs * d * d
                } else {
                    bits * self.e_elec + bits * self.eps_mp * d.powi(4)
                }
            }
            ModelKind::Simple => {
                let amp = self.e_amp * d * d;
                self.e_trans * bits + if self.amp_per_bit { amp * bits } else { amp }
            }
        })
    }

    /// Energy to receive `bits`.
    pub fn rx_energy(&self, bits: f64) -> Result<f64, EnergyError> {
        non_negative("bits", bits)?;
        Ok(match self.kind {
            ModelKind::TwoRegime => bits * self.e_elec,
            ModelKind::Simple => self.e_recv * bits,
        })
    }
}

fn non_negative(what: &'static str, value: f64) -> Result<(), EnergyError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(EnergyError::Negative { what, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Tx,
    Rx,
    Idle,
    Sense,
    Move,
}

/// Consumption broken down by category. A node is alive while its residual
/// energy stays above zero; once dead the ledger no longer changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub initial: f64,
    pub consumed_tx: f64,
    pub consumed_rx: f64,
    pub consumed_idle: f64,
    pub consumed_sense: f64,
    pub consumed_move: f64,
    residual: f64,
    alive: bool,
    #[serde(skip)]
    warned_dead: bool,
}

impl EnergyLedger {
    pub fn new(initial: f64) -> Self {
        Self {
            initial,
            consumed_tx: 0.0,
            consumed_rx: 0.0,
            consumed_idle: 0.0,
            consumed_sense: 0.0,
            consumed_move: 0.0,
            residual: initial,
            alive: initial > 0.0,
            warned_dead: false,
        }
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn is_alive(&self) -> bool {
        self.alive
    }

    pub fn total_consumed(&self) -> f64 {
        self.consumed_tx + self.consumed_rx + self.consumed_idle + self.consumed_sense + self.consumed_move
    }

    /// Debits `amount` from the node. The debit is capped at the remaining
    /// residual so the ledger always balances; the node dies when the residual
    /// reaches zero. Returns whether the node is still alive.
    pub fn charge(&mut self, category: Category, amount: f64) -> Result<bool, EnergyError> {
        non_negative("charge amount", amount)?;
        if !self.alive {
            if !self.warned_dead {
                log::debug!("ignoring {amount} J {category:?} charge on a dead node");
                self.warned_dead = true;
            }
            return Ok(false);
        }
        let debit = amount.min(self.residual);
        let slot = match category {
            Category::Tx => &mut self.consumed_tx,
            Category::Rx => &mut self.consumed_rx,
            Category::Idle => &mut self.consumed_idle,
            Category::Sense => &mut self.consumed_sense,
            Category::Move => &mut self.consumed_move,
        };
        *slot += debit;
        self.residual -= debit;
        if self.residual <= 0.0 {
            self.residual = 0.0;
            self.alive = false;
        }
        Ok(self.alive)
    }

    /// Marks the node dead without touching its counters (hardware failure).
    pub fn kill(&mut self) {
        self.alive = false;
    }

    /// `initial - (residual + consumed)`, zero up to rounding.
    pub fn imbalance(&self) -> f64 {
        self.initial - (self.residual + self.total_consumed())
    }
}

/// Share of a cluster's residual energy held by one of its zones; zero when
/// the cluster has nothing left.
pub fn zone_energy_ratio(zone_residual: f64, cluster_residual: f64) -> Result<f64, EnergyError> {
    non_negative("zone residual", zone_residual)?;
    non_negative("cluster residual", cluster_residual)?;
    if zone_residual > cluster_residual {
        return Err(EnergyError::ZoneExceedsCluster { zone: zone_residual, cluster: cluster_residual });
    }
    if cluster_residual == 0.0 {
        return Ok(0.0);
    }
    Ok(zone_residual / cluster_residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_bits_cost_nothing() {
        let radio = RadioModel::physical();
        assert_eq!(radio.tx_energy(0.0, 120.0).unwrap(), 0.0);
        assert_eq!(radio.rx_energy(0.0).unwrap(), 0.0);
    }

    #[test]
    fn simple_model_hand_values() {
        let radio = RadioModel::simple(0.02, 0.01, 0.01);
        assert!((radio.tx_energy(1.0, 0.0).unwrap() - 0.02).abs() < 1e-15);
        assert!((radio.rx_energy(4096.0).unwrap() - 40.96).abs() < 1e-9);
        // amplifier charged once per message unless amp_per_bit
        assert!((radio.tx_energy(10.0, 3.0).unwrap() - (0.2 + 0.09)).abs() < 1e-12);
        let per_bit = RadioModel { amp_per_bit: true, ..radio };
        assert!((per_bit.tx_energy(10.0, 3.0).unwrap() - (0.2 + 0.9)).abs() < 1e-12);
    }

    #[test]
    fn two_regime_switches_at_d0() {
        let radio = RadioModel { d0: 50.0, ..RadioModel::physical() };
        let at = radio.tx_energy(100.0, 50.0).unwrap();
        let expected = 100.0 * radio.e_elec + 100.0 * radio.eps_mp * 50f64.powi(4);
        assert!((at - expected).abs() < 1e-18);
        let below = radio.tx_energy(100.0, 49.0).unwrap();
        let expected_below = 100.0 * radio.e_elec + 100.0 * radio.eps_fs * 49.0 * 49.0;
        assert!((below - expected_below).abs() < 1e-18);
    }

    #[test]
    fn rx_is_linear() {
        let radio = RadioModel::physical();
        let one = radio.rx_energy(800.0).unwrap();
        let two = radio.rx_energy(1600.0).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-18);
    }

    #[test]
    fn negative_inputs_rejected() {
        let radio = RadioModel::physical();
        assert!(radio.tx_energy(-1.0, 1.0).is_err());
        assert!(radio.tx_energy(1.0, -1.0).is_err());
        assert!(radio.rx_energy(-3.0).is_err());
        assert!(EnergyLedger::new(1.0).charge(Category::Tx, -0.1).is_err());
    }

    #[test]
    fn charge_examples() {
        let mut ledger = EnergyLedger::new(4.0);
        assert!(ledger.charge(Category::Tx, 1.0).unwrap());
        assert_eq!(ledger.residual(), 3.0);

        let mut ledger = EnergyLedger::new(0.5);
        assert!(!ledger.charge(Category::Rx, 0.5).unwrap());
        assert_eq!(ledger.residual(), 0.0);
        assert!(!ledger.is_alive());
        // frozen afterwards
        assert!(!ledger.charge(Category::Tx, 1.0).unwrap());
        assert_eq!(ledger.consumed_tx, 0.0);
    }

    #[test]
    fn overdraw_is_capped_at_residual() {
        let mut ledger = EnergyLedger::new(1.0);
        ledger.charge(Category::Tx, 0.4).unwrap();
        assert!(!ledger.charge(Category::Move, 10.0).unwrap());
        assert!((ledger.consumed_move - 0.6).abs() < 1e-15);
        assert!(ledger.imbalance().abs() < 1e-15);
    }

    #[test]
    fn zone_ratio_examples() {
        assert_eq!(zone_energy_ratio(1.0, 10.0).unwrap(), 0.1);
        assert_eq!(zone_energy_ratio(0.0, 10.0).unwrap(), 0.0);
        assert_eq!(zone_energy_ratio(2.5, 10.0).unwrap(), 0.25);
        assert_eq!(zone_energy_ratio(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(zone_energy_ratio(3.0, 2.0), Err(EnergyError::ZoneExceedsCluster { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn category() -> impl Strategy<Value = Category> {
            prop_oneof![
                Just(Category::Tx),
                Just(Category::Rx),
                Just(Category::Idle),
                Just(Category::Sense),
                Just(Category::Move),
            ]
        }

        proptest! {
            #[test]
            fn ledger_conserves_energy(initial in 0.1f64..10.0, charges in prop::collection::vec((category(), 0.0f64..0.5), 0..60)) {
                let mut ledger = EnergyLedger::new(initial);
                for (cat, amount) in charges {
                    let before = ledger.total_consumed();
                    ledger.charge(cat, amount).unwrap();
                    prop_assert!(ledger.total_consumed() >= before);
                    prop_assert!(ledger.residual() >= 0.0);
                    prop_assert!(ledger.imbalance().abs() <= 1e-9 * initial);
                }
            }

            #[test]
            fn tx_increases_with_distance(bits in 1.0f64..8192.0, d in 0.0f64..500.0, step in 0.01f64..50.0) {
                for radio in [RadioModel::physical(), RadioModel::simple(0.02, 0.01, 0.01)] {
                    let near = radio.tx_energy(bits, d).unwrap();
                    let far = radio.tx_energy(bits, d + step).unwrap();
                    prop_assert!(far > near);
                }
            }
        }
    }
}
