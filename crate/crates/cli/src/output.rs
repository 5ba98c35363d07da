//! Text serialization. Every float goes through [`num`] so that CSV and
//! JSON carry 17 significant digits and round-trip exactly.

use std::io::{self, Write};

use adiasearch::analysis::{RuntimeResult, SlopeFit, SweepRow};
use adiasearch::bounds::BoundReport;
use adiasearch::dynamics::Trajectory;

pub const TRAJECTORY_HEADER: &str = "s,vx,vy,vz,p,y";
pub const SWEEP_HEADER: &str = "log2N,log2T,N,T,p,omega,sigma,schedule";

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON number; non-finite values become `null`.
fn jnum(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

fn jstr(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// Builds one flat JSON object, keys in the given order.
pub struct JsonObject(Vec<String>);

impl JsonObject {
    pub fn new() -> Self {
        JsonObject(Vec::new())
    }

    pub fn num(mut self, key: &str, x: f64) -> Self {
        self.0.push(format!("{}:{}", jstr(key), jnum(x)));
        self
    }

    pub fn int(mut self, key: &str, x: u64) -> Self {
        self.0.push(format!("{}:{x}", jstr(key)));
        self
    }

    pub fn str(mut self, key: &str, s: &str) -> Self {
        self.0.push(format!("{}:{}", jstr(key), jstr(s)));
        self
    }

    pub fn bool(mut self, key: &str, b: bool) -> Self {
        self.0.push(format!("{}:{b}", jstr(key)));
        self
    }

    pub fn opt_num(self, key: &str, x: Option<f64>) -> Self {
        match x {
            Some(x) => self.num(key, x),
            None => self.null(key),
        }
    }

    pub fn null(mut self, key: &str) -> Self {
        self.0.push(format!("{}:null", jstr(key)));
        self
    }

    pub fn finish(self) -> String {
        format!("{{{}}}", self.0.join(","))
    }
}

pub fn trajectory_csv(out: &mut dyn Write, tr: &Trajectory) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for x in &tr.samples {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(x.s),
            num(x.v.x),
            num(x.v.y),
            num(x.v.z),
            num(x.p),
            num(x.y)
        )?;
    }
    Ok(())
}

/// One JSON object per line, keys as in the CSV header.
pub fn trajectory_json(out: &mut dyn Write, tr: &Trajectory) -> io::Result<()> {
    for x in &tr.samples {
        let obj = JsonObject::new()
            .num("s", x.s)
            .num("vx", x.v.x)
            .num("vy", x.v.y)
            .num("vz", x.v.z)
            .num("p", x.p)
            .num("y", x.y);
        writeln!(out, "{}", obj.finish())?;
    }
    Ok(())
}

/// A failed row keeps `N` and the parameters but leaves `log2T` and `T` empty.
pub fn sweep_csv(out: &mut dyn Write, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        let (log2t, t) = match r.run_time() {
            Some(t) => (num(t.log2()), num(t)),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{},{log2t},{},{t},{},{},{},{}",
            num((r.n_items as f64).log2()),
            r.n_items,
            num(r.p_target),
            num(r.omega),
            num(r.sigma),
            r.schedule
        )?;
    }
    Ok(())
}

pub fn sweep_json(out: &mut dyn Write, rows: &[SweepRow]) -> io::Result<()> {
    for r in rows {
        let mut obj = JsonObject::new()
            .num("log2N", (r.n_items as f64).log2())
            .opt_num("log2T", r.run_time().map(f64::log2))
            .int("N", r.n_items)
            .opt_num("T", r.run_time())
            .num("p", r.p_target)
            .num("omega", r.omega)
            .num("sigma", r.sigma)
            .str("schedule", r.schedule.as_str());
        match &r.outcome {
            Ok(res) => {
                obj = obj
                    .num("p_achieved", res.p_achieved)
                    .int("evaluations", res.evaluations as u64)
            }
            Err(e) => obj = obj.str("error", &e.to_string()),
        }
        writeln!(out, "{}", obj.finish())?;
    }
    Ok(())
}

pub fn runtime_json(res: &RuntimeResult) -> String {
    JsonObject::new()
        .int("n_items", res.n_items)
        .num("run_time", res.run_time)
        .num("p_achieved", res.p_achieved)
        .num("bracket_low", res.bracket.0)
        .num("bracket_high", res.bracket.1)
        .int("evaluations", res.evaluations as u64)
        .finish()
}

pub fn report_json(name: &str, rep: &BoundReport) -> String {
    JsonObject::new()
        .str("name", name)
        .num("value", rep.value)
        .num("observed", rep.observed)
        .bool("holds", rep.holds)
        .num("margin", rep.margin)
        .finish()
}

pub fn fit_json(fit: &SlopeFit) -> String {
    JsonObject::new()
        .num("slope", fit.slope)
        .num("intercept", fit.intercept)
        .int("n_min", fit.window.0)
        .int("n_max", fit.window.1)
        .num("residual", fit.residual)
        .finish()
}
