use std::fmt::Write as _;

use anyhow::Result;
use medusa_core::kinematics::analyze_body;
use medusa_core::reservoir::{dead_reckoned_targets, pulse_onsets_from_radius};
use medusa_core::sensorsearch::{search_best, SearchTask, SensorPool};

use crate::args::SearchArgs;
use crate::data::{load_trials, num, washout_for};
use crate::manifest::Run;
use crate::svg::bar_chart;
use crate::usage;

const TALLY_BARS: usize = 10;

pub fn run(a: &SearchArgs) -> Result<()> {
    let mut run = Run::new("search-sensors", &a.io.out, a, None)?;
    let trials = load_trials(&mut run, &a.io)?;

    // Pool and targets of every trial, end to end.
    let mut names = Vec::new();
    let mut pool_data: Vec<Vec<f64>> = Vec::new();
    let mut task_names = Vec::new();
    let mut task_data: Vec<Vec<f64>> = Vec::new();
    let mut stimulus = Vec::new();
    for t in &trials {
        let fs = t.trial.frame_rate;
        let pool = SensorPool::from_trial(&t.trial)?;
        let body = analyze_body(&t.trial)?;
        let onsets = pulse_onsets_from_radius(&body.pose.inner_radius, fs)?;
        let targets = dead_reckoned_targets(&body, &onsets, fs).lowpassed(fs)?;
        if pool_data.is_empty() {
            names = pool.names.clone();
            pool_data = vec![Vec::new(); pool.len()];
            task_names = targets.names.clone();
            task_data = vec![Vec::new(); targets.data.len()];
        }
        for (a, b) in pool_data.iter_mut().zip(pool.data) {
            a.extend(b);
        }
        for (a, b) in task_data.iter_mut().zip(targets.data) {
            a.extend(b);
        }
        stimulus.extend(t.trial.stimulus.iter().map(|&s| if s { 1.0 } else { 0.0 }));
    }
    let pool = SensorPool::new(names, pool_data)?;
    if a.kmax == 0 || a.kmax > pool.len() {
        usage!("--kmax", "must be between 1 and the pool size {}", pool.len());
    }
    let mut tasks: Vec<SearchTask<f64>> = task_names
        .into_iter()
        .zip(task_data)
        .map(|(name, target)| SearchTask { name, target })
        .collect();
    if stimulus.iter().any(|&s| s != stimulus[0]) {
        tasks.push(SearchTask {
            name: "stimulus".into(),
            target: stimulus,
        });
    }
    let washout = washout_for(a.washout, 1, pool.samples())?;
    run.lap("load");

    let report = search_best(&pool, &tasks, a.kmax, washout)?;
    run.lap("search");
    println!(
        "evaluated {} subsets of {} sensors (k <= {}, {} collinear) for {} tasks in {:.2} s",
        report.subsets_evaluated,
        pool.len(),
        a.kmax,
        report.subsets_degenerate,
        tasks.len(),
        report.elapsed_s
    );

    let mut best = String::from("task,r2,sensors\n");
    for b in &report.best {
        let _ = writeln!(best, "{},{},{}", b.task, num(b.r2), b.sensors.join(" "));
        println!("  {:<10} R² {:.4}  {}", b.task, b.r2, b.sensors.join(" "));
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| report.tally[j].cmp(&report.tally[i]).then(i.cmp(&j)));
    let mut tally = String::from("sensor,wins\n");
    for &i in &order {
        let _ = writeln!(tally, "{},{}", pool.names[i], report.tally[i]);
    }
    run.write("best_subsets.csv", best)?;
    run.write("tally.csv", tally)?;
    run.write_json("search.json", &report)?;
    let top: Vec<usize> = order.iter().copied().take(TALLY_BARS).collect();
    let labels: Vec<String> = top.iter().map(|&i| pool.names[i].clone()).collect();
    let counts: Vec<f64> = top.iter().map(|&i| report.tally[i] as f64).collect();
    run.write(
        "tally.svg",
        bar_chart("sensors in best subsets", "tasks won", &labels, &counts, None),
    )?;
    run.finish()
}
