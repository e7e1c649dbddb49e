// SPDX-License-Identifier: Apache-2.0

//! The seven figure scenarios, all built from the constants below.

use crate::scenario::{Level, ScenarioConfig};

pub const PANEL_N_CHARGER: usize = 10_000_000;
pub const PANEL_N_BATTERY: usize = 100;
pub const PANEL_GAMMA_DOWN: f64 = 1.0;
pub const PANEL_TAU_MAX: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub name: &'static str,
    pub reservoirs: usize,
    /// Pump rate in units of `gamma_down`.
    pub pump: f64,
    pub charger: Level,
}

pub const PANELS: [Panel; 7] = [
    Panel {
        name: "a",
        reservoirs: 1,
        pump: 0.0,
        charger: Level::Excited,
    },
    Panel {
        name: "b",
        reservoirs: 2,
        pump: 0.0,
        charger: Level::Excited,
    },
    Panel {
        name: "c",
        reservoirs: 2,
        pump: 1.0,
        charger: Level::Excited,
    },
    Panel {
        name: "d",
        reservoirs: 3,
        pump: 0.0,
        charger: Level::Excited,
    },
    Panel {
        name: "e",
        reservoirs: 3,
        pump: 1.0,
        charger: Level::Excited,
    },
    Panel {
        name: "f",
        reservoirs: 3,
        pump: 2.0,
        charger: Level::Excited,
    },
    Panel {
        name: "inset",
        reservoirs: 3,
        pump: 2.0,
        charger: Level::Ground,
    },
];

impl Panel {
    pub fn by_name(name: &str) -> Option<Panel> {
        PANELS.iter().copied().find(|p| p.name == name)
    }

    pub fn scenario(&self) -> ScenarioConfig {
        let mut sc = ScenarioConfig::new(
            PANEL_N_CHARGER,
            vec![PANEL_N_BATTERY; self.reservoirs],
            PANEL_GAMMA_DOWN,
            self.pump * PANEL_GAMMA_DOWN,
        );
        sc.initial_levels[0] = self.charger;
        sc.tau_max = PANEL_TAU_MAX;
        sc
    }

    pub fn title(&self) -> String {
        let charger = match self.charger {
            Level::Excited => "",
            Level::Ground => ", charger ground",
        };
        format!(
            "panel {}: M = {}, gamma_up = {} gamma_down{charger}",
            self.name, self.reservoirs, self.pump
        )
    }
}
