//! Power unit conversions. Every dBm/W conversion in the crate goes through here.

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(-30.0) - 1e-6).abs() < 1e-20);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
        assert!((watts_to_dbm(1e-3)).abs() < 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
        assert_eq!(watts_to_dbm(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn round_trip() {
        for dbm in [-120.0, -80.0, -30.0, 0.0, 17.5, 40.0] {
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-9);
        }
    }
}
