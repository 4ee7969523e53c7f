use std::fmt::Write as _;

use anyhow::Result;
use medusa_core::esp::{esp_channels, esp_index, ChannelSet, EspParams};
use medusa_core::response::{one_way_anova, pairwise_tests, AnovaResult, PairwiseResult};
use medusa_core::scalar::variance;
use serde::Serialize;

use crate::args::{EspArgs, EspChannels};
use crate::data::{by_condition, fs_of, load_trials, num};
use crate::manifest::Run;
use crate::svg::bar_chart;
use crate::usage;

#[derive(Serialize)]
struct Stats {
    /// Groups are the pairwise distances of each condition.
    conditions: Vec<String>,
    anova: Option<AnovaResult>,
    pairwise: Vec<PairwiseResult>,
    note: Option<String>,
}

pub fn run(a: &EspArgs) -> Result<()> {
    if !(a.transient.is_finite() && a.transient >= 0.0) {
        usage!("--transient", "must be non-negative");
    }
    if !(a.horizon.is_finite() && a.horizon > a.transient) {
        usage!("--horizon", "must exceed --transient ({})", a.transient);
    }
    let set = match a.channels {
        EspChannels::Lengths => ChannelSet::Lengths,
        EspChannels::Vx => ChannelSet::Velocity(0),
        EspChannels::Vy => ChannelSet::Velocity(1),
        EspChannels::Vz => ChannelSet::Velocity(2),
    };
    let mut run = Run::new("esp", &a.io.out, a, Some(a.seed))?;
    let trials = load_trials(&mut run, &a.io)?;
    let params = EspParams {
        transient_s: a.transient,
        horizon_s: a.horizon,
    };

    let mut table = String::from("condition,trials,p,esp_index,sd_per_reference,note\n");
    let mut pairs_csv = String::from("condition,i,j,trial_i,trial_j,delta\n");
    let (mut labels, mut values, mut errors, mut groups) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (label, members) in by_condition(&trials) {
        let fs = fs_of(&members)?;
        let result = members
            .iter()
            .map(|t| esp_channels(&t.trial, set))
            .collect::<Result<Vec<_>, _>>()
            .and_then(|ch| esp_index(&ch, fs, params));
        match result {
            Ok(r) => {
                let sd = variance(&r.per_reference).sqrt();
                let _ = writeln!(table, "{label},{},{},{},{},", members.len(), r.p, num(r.value), num(sd));
                for &(i, j, d) in &r.pairs {
                    let _ = writeln!(
                        pairs_csv,
                        "{label},{i},{j},{},{},{}",
                        members[i].stem,
                        members[j].stem,
                        num(d)
                    );
                }
                println!("{label}: ESP index {:.4} over {} trials", r.value, members.len());
                labels.push(label.clone());
                values.push(r.value);
                errors.push(sd);
                groups.push((label, r.pairs.iter().map(|p| p.2).collect::<Vec<f64>>()));
            }
            Err(e) => {
                let _ = writeln!(
                    table,
                    "{label},{},,,,{}",
                    members.len(),
                    e.to_string().replace(',', ";")
                );
                println!("{label}: skipped ({e})");
            }
        }
    }
    run.lap("index");

    let usable: Vec<&(String, Vec<f64>)> = groups.iter().filter(|g| g.1.len() >= 2).collect();
    let stats = if usable.len() >= 2 {
        let data: Vec<Vec<f64>> = usable.iter().map(|g| g.1.clone()).collect();
        let anova = one_way_anova(&data).ok();
        let pairwise = pairwise_tests(&data, a.permutations, a.seed).unwrap_or_default();
        if let Some(an) = &anova {
            println!(
                "ANOVA F({}, {}) = {:.3}, p = {:.4}",
                an.df_between, an.df_within, an.f, an.p
            );
        }
        Stats {
            conditions: usable.iter().map(|g| g.0.clone()).collect(),
            anova,
            pairwise,
            note: None,
        }
    } else {
        Stats {
            conditions: usable.iter().map(|g| g.0.clone()).collect(),
            anova: None,
            pairwise: Vec::new(),
            note: Some("group statistics need two conditions with at least three trials each".into()),
        }
    };
    run.lap("stats");

    run.write("esp.csv", table)?;
    run.write("esp_pairs.csv", pairs_csv)?;
    run.write_json("esp_stats.json", &stats)?;
    if !values.is_empty() {
        let title = format!("ESP index (mean distance {}-{} s)", a.transient, a.horizon);
        run.write("esp.svg", bar_chart(&title, "index", &labels, &values, Some(&errors)))?;
    }
    run.finish()
}
