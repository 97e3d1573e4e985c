//! Ready-made technology profiles and the reference coexistence scenario.
//!
//! The reference scenario pairs a LoRa-like duty-cycled technology (three
//! channels, seven orthogonal spreading codes, 20 dBm) against a denser
//! generic IoT population that hops uniformly across a 1.25 MHz band at
//! 14 dBm. It is the configuration exercised throughout the test suite and
//! emitted by the CLI's `emit-scenario` command as a starting point.

use crate::model::{
    AckModel, CarrierDistribution, ChannelModel, EnergyModel, Fading, RetransmissionPolicy,
    Scenario, TechnologyClass, TruncationMode,
};
use crate::units::{db_to_linear, dbm_to_watts};

/// Parameters of a duty-cycled, frequency-hopped technology in the style of
/// LoRaWAN: a grid of orthogonal channels times quasi-orthogonal spreading
/// codes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoRaProfile {
    /// Number of uplink channels devices hop over.
    pub channels: u32,
    /// Number of orthogonal spreading factors per channel.
    pub spreading_factors: u32,
    /// On-air time of one packet (s).
    pub packet_time: f64,
    /// Mean time between reports of one device (s).
    pub reporting_period: f64,
}

/// Probability that a random same-technology device interferes with a given
/// transmission: it must be on air (duty cycle) and land on the same
/// channel/spreading-factor resource out of `channels * spreading_factors`
/// equally likely ones.
pub fn lora_time_activity(profile: &LoRaProfile) -> f64 {
    profile.packet_time
        / (profile.reporting_period
            * f64::from(profile.channels)
            * f64::from(profile.spreading_factors))
}

/// Acknowledgement success over two independent receive windows with per-
/// window success probabilities `p_rx1` and `p_rx2`: the ack is lost only if
/// both windows fail.
pub fn lora_ack_probability(p_rx1: f64, p_rx2: f64) -> f64 {
    p_rx1 + p_rx2 - p_rx1 * p_rx2
}

/// The two-class reference scenario used across the documentation, tests and
/// benchmarks.
///
/// Class 0 ("reference"): LoRa-like, 20 dBm, 125 kHz, fixed carrier at
/// 868.1 MHz, 1 s packets at a 21% duty cycle spread over 3 channels x 7
/// spreading factors, 2.5e-3 devices/m^2.
///
/// Class 1 ("interferer"): generic IoT, 14 dBm, 125 kHz, carrier uniform
/// over [867.475, 868.725] MHz, 1 s packets every 100 s, 1e-2 devices/m^2.
///
/// Channel: pathloss exponent 4, Rayleigh fading, -174 dBm/Hz noise. The
/// decoding threshold is 3 dB. Sessions allow 7 attempts with 1 s between
/// them, and acknowledgements are ideal.
pub fn reference_scenario() -> Scenario {
    let lora = LoRaProfile {
        channels: 3,
        spreading_factors: 7,
        packet_time: 1.0,
        reporting_period: 1.0 / 0.21,
    };
    Scenario {
        classes: vec![
            TechnologyClass {
                name: "reference".into(),
                technology_id: "lora".into(),
                tx_power: dbm_to_watts(20.0),
                bandwidth: 125e3,
                carrier: CarrierDistribution::PointMass { frequency: 868.1e6 },
                packet_time: lora.packet_time,
                mean_inter_packet_time: lora.reporting_period,
                device_density: 2.5e-3,
                ap_density: 1e-5,
                orthogonal_channels: lora.channels,
                orthogonal_codes: lora.spreading_factors,
            },
            TechnologyClass {
                name: "interferer".into(),
                technology_id: "generic-iot".into(),
                tx_power: dbm_to_watts(14.0),
                bandwidth: 125e3,
                carrier: CarrierDistribution::Uniform {
                    f_min: 867.475e6,
                    f_max: 868.725e6,
                },
                packet_time: 1.0,
                mean_inter_packet_time: 100.0,
                device_density: 1e-2,
                ap_density: 1e-5,
                orthogonal_channels: 1,
                orthogonal_codes: 1,
            },
        ],
        channel: ChannelModel {
            pathloss_exponent: 4.0,
            fading: Fading::RayleighUnitMean,
            noise_density: dbm_to_watts(-174.0),
        },
        energy: EnergyModel {
            circuit_power: 0.1,
            pa_overhead: 0.7,
            rx_power: 0.1,
            active_time: 2.0,
            ack_time: 1.0,
            battery_capacity: 4000.0,
        },
        retransmission: RetransmissionPolicy {
            max_transmissions: 7,
            retry_wait: 1.0,
            truncation: TruncationMode::Truncated,
        },
        sinr_threshold: db_to_linear(3.0),
        ack_model: AckModel::Ideal,
    }
}
