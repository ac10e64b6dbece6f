//! Line-oriented run reports: one `key = value` per line, floats with 17
//! significant digits, vectors comma-separated. Output is a pure function
//! of the inputs unless timing is requested.

use std::fmt::Write;

use crate::config::SolverConfig;
use crate::game::{Certificate, GameInstance, Verdict};
use crate::solvers::SolveOutcome;

pub fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn vector(v: &[f64]) -> String {
    v.iter().map(|t| real(*t)).collect::<Vec<_>>().join(",")
}

pub fn verdict(v: &Verdict) -> String {
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail(reason) => format!("fail: {reason}"),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    lines: Vec<(String, String)>,
}

impl RunReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn lines(&self) -> &[(String, String)] {
        &self.lines
    }

    /// Value of the first line with this key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Header shared by every command: solver, instance, config echo and
    /// load-time hypothesis checks.
    pub fn header(command: &str, digest: &str, game: &GameInstance, cfg: &SolverConfig) -> Self {
        let mut r = Self::new();
        r.push("solver", command);
        r.push("instance.digest", digest);
        r.push("instance.players", game.n_players());
        r.push(
            "instance.dims",
            game.dims().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
        );
        r.push("instance.utility_reducible", game.is_utility_reducible());
        r.push("config.h", real(cfg.h));
        r.push("config.eps.grid", real(cfg.grid_eps()));
        r.push("config.eps.analytic", real(cfg.analytic_eps()));
        r.push("config.lambda", real(cfg.lambda));
        r.push("config.budget", cfg.random_budget);
        r.push("config.seed", cfg.seed);
        r.push("config.max_iter", cfg.max_iter);
        r.push("config.multistart", cfg.multistart);
        r.push("config.strictness", real(cfg.strictness));
        r.push("config.h_g", real(cfg.graph_spacing()));
        r.push("config.rho", real(cfg.rho));
        r.push("config.angular_resolution", cfg.angular_resolution);
        let h = game.hypotheses();
        r.push("hypothesis.nonempty_k.probes", h.nonempty_k_probes);
        r.push("hypothesis.nonempty_k.interval_proof", h.nonempty_k_by_interval);
        r.push("hypothesis.self_exclusion.probes", h.self_exclusion_probes);
        r.push("hypothesis.self_exclusion.budget", h.self_exclusion_budget);
        r.push(
            "resolution",
            format!(
                "emptiness of P_i(y) within K_i(x) is checked on a lattice of spacing {} plus {} seeded samples (seed {}); it holds up to this resolution",
                real(cfg.h),
                cfg.random_budget,
                cfg.seed
            ),
        );
        r
    }

    pub fn certificate(&mut self, k: usize, c: &Certificate) {
        let p = format!("certificate[{k}]");
        self.push(format!("{p}.x"), vector(&c.x_tilde));
        self.push(format!("{p}.y"), vector(&c.y_tilde));
        let mut res = vec![c.projection_residual];
        res.extend(c.players.iter().map(|r| r.membership_residual));
        self.push(format!("{p}.residuals"), vector(&res));
        for (i, r) in c.players.iter().enumerate() {
            let w = r.witness.as_deref().map_or("none".to_string(), vector);
            self.push(format!("{p}.witness[{}]", i + 1), w);
        }
        self.push(format!("{p}.eps"), real(c.eps));
        self.push(format!("{p}.verdict"), verdict(&c.verdict));
    }

    /// Body for the scanning and iterative solvers.
    pub fn outcome(&mut self, out: &SolveOutcome) {
        if !out.runs.is_empty() {
            self.push("runs", out.runs.len());
            for (k, run) in out.runs.iter().enumerate() {
                let p = format!("run[{k}]");
                self.push(format!("{p}.start"), vector(&run.start));
                self.push(format!("{p}.iterations"), run.iterations);
                self.push(format!("{p}.converged"), run.converged);
                self.push(format!("{p}.movement"), real(run.movement));
                self.push(format!("{p}.x"), vector(&run.x));
                self.push(format!("{p}.y"), vector(&run.y));
                self.push(format!("{p}.verdict"), verdict(&run.verdict));
            }
        } else {
            self.push("scanned", out.scanned);
        }
        self.push("certificates", out.clusters.len());
        for (k, c) in out.clusters.iter().enumerate() {
            self.certificate(k, &c.representative);
            let p = format!("certificate[{k}]");
            self.push(format!("{p}.cluster.members"), c.members);
            self.push(format!("{p}.cluster.x_lower"), vector(&c.x_lower));
            self.push(format!("{p}.cluster.x_upper"), vector(&c.x_upper));
            self.push(format!("{p}.cluster.y_lower"), vector(&c.y_lower));
            self.push(format!("{p}.cluster.y_upper"), vector(&c.y_upper));
        }
        if let Some(a) = &out.advisory {
            self.push("advisory", a);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(real(1.0), "1.0000000000000000e0");
        assert_eq!(real(0.1), "1.0000000000000001e-1");
        assert_eq!(vector(&[2.0, -0.5]), "2.0000000000000000e0,-5.0000000000000000e-1");
        assert_eq!(real(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn render_lines() {
        let mut r = RunReport::new();
        r.push("a", 1);
        r.push("b.c", "x y");
        assert_eq!(r.render(), "a = 1\nb.c = x y\n");
        assert_eq!(r.get("b.c"), Some("x y"));
    }
}
