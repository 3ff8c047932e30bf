//! Free-space path loss: converts between received signal strength and
//! line-of-sight distance.

/// Constant term of the FSPL formula with distance in meters and frequency
/// in MHz.
const FSPL_CONSTANT_DB: f64 = 27.55;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FsplParams {
    pub frequency_mhz: f64,
    pub tx_power_dbm: f64,
}

impl Default for FsplParams {
    fn default() -> Self {
        FsplParams {
            frequency_mhz: 2400.0,
            tx_power_dbm: 0.0,
        }
    }
}

impl FsplParams {
    pub fn path_loss_db(&self, distance_m: f64) -> f64 {
        20.0 * distance_m.log10() + 20.0 * self.frequency_mhz.log10() - FSPL_CONSTANT_DB
    }

    /// Signal strength received at `distance_m` from the transmitter.
    pub fn rssi_at(&self, distance_m: f64) -> f64 {
        self.tx_power_dbm - self.path_loss_db(distance_m)
    }
}

/// Estimated transmitter distance in meters for a received signal strength.
pub fn fspl_distance(rssi_dbm: f64, params: &FsplParams) -> f64 {
    let path_loss = params.tx_power_dbm - rssi_dbm;
    10f64.powf((path_loss + FSPL_CONSTANT_DB - 20.0 * params.frequency_mhz.log10()) / 20.0)
}
