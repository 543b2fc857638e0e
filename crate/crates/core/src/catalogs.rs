//! Built-in reference catalogs and instance families.
//!
//! The JSON files under `data/` carry the same values; these constructors
//! exist so library users and tests need no file access.

use crate::model::{ControlLoop, DeviceType, ProblemInstance};

#[allow(clippy::too_many_arguments)]
fn device(
    id: &str,
    cost: f64,
    channels: u32,
    memory: f64,
    fail_prob: f64,
    instr_time: f64,
    is_processor: bool,
    max_children: u32,
    relay_delay: f64,
) -> DeviceType {
    DeviceType {
        id: id.to_string(),
        cost,
        channels,
        memory,
        fail_prob,
        instr_time,
        is_processor,
        max_children,
        relay_delay,
    }
}

/// Two controllers without I/O channels and three I/O relays.
pub fn table1_catalog() -> Vec<DeviceType> {
    vec![
        device("u1", 1000.0, 0, 512.0, 0.01, 0.002, true, 4, 0.0),
        device("u2", 990.0, 0, 256.0, 0.02, 0.004, true, 4, 0.0),
        device("u3", 80.0, 8, 0.0, 0.005, 0.0, false, 4, 0.01),
        device("u4", 78.0, 4, 0.0, 0.005, 0.0, false, 4, 0.03),
        device("u5", 65.0, 2, 0.0, 0.001, 0.0, false, 8, 0.02),
    ]
}

/// `count` identical loops (1 signal, 1 memory unit, 5 instructions) on the
/// five-type catalog with `t_max = 1 s` and `p_max = 0.1`.
pub fn table1_instance(count: usize, levels: u32) -> ProblemInstance {
    ProblemInstance::new(
        table1_catalog(),
        vec![ControlLoop::new(1, 1.0, 5); count],
        levels,
        1.0,
        0.1,
    )
    .expect("reference instance is valid")
}

/// PLCs, switches and analog input modules (prices in RUB).
pub fn ims_catalog() -> Vec<DeviceType> {
    vec![
        device("u1", 77544.0, 0, 256.0, 0.0839, 1e-6, true, 1, 0.0),
        device("u2", 91988.0, 0, 1024.0, 0.0839, 0.8e-6, true, 1, 0.0),
        device("u3", 8968.0, 0, 0.0, 0.0839, 0.0, false, 5, 0.0),
        device("u4", 13285.0, 0, 0.0, 0.0839, 0.0, false, 8, 0.0),
        device("u5", 22977.0, 8, 0.0, 0.0839, 0.0, false, 0, 0.6),
        device("u6", 28182.0, 8, 0.0, 0.0839, 0.0, false, 0, 0.28),
        device("u7", 21350.0, 16, 0.0, 0.0839, 0.0, false, 0, 0.08),
    ]
}

/// 260 single-signal analog loops over four levels. Neither limit is given
/// for this case, so both are set to 1.0.
pub fn ims_instance() -> ProblemInstance {
    let mut inst = ProblemInstance::new(
        ims_catalog(),
        vec![ControlLoop::new(1, 2e-4, 1); 260],
        4,
        1.0,
        1.0,
    )
    .expect("reference instance is valid");
    inst.note = Some(IMS_NOTE.to_string());
    inst
}

pub(crate) const IMS_NOTE: &str =
    "t_max and p_max are not part of the source data; both set to 1.0 so only structure, channels and cost bind";
