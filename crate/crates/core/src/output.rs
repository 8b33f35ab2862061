//! Trace CSV, key-value run report and SVG line charts.

use std::fmt::Write as _;
use std::io;

use crate::engine::{Channel, EventKind, Metrics, Trace};
use crate::error::{Error, Result};
use crate::scenario::{GainSource, Scenario};

const AGENT_FIELDS: [&str; 5] = ["pos", "vel", "tilt", "rate", "u"];

/// Column names in CSV order.
pub fn trace_columns(trace: &Trace) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for i in 0..trace.agent_count() {
        cols.extend(AGENT_FIELDS.iter().map(|f| format!("agent{i}_{f}")));
    }
    for k in 0..trace.channels.len() {
        cols.push(format!("pair{k}_d"));
        cols.push(format!("pair{k}_fen"));
    }
    cols.push("rms".to_string());
    cols
}

/// One row's values in CSV order.
fn row_values(row: &crate::engine::TraceRow) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 + row.agents.len() * 5 + row.pairs.len() * 2);
    v.push(row.t);
    for a in &row.agents {
        v.extend([a.state.pos, a.state.vel, a.state.tilt, a.state.tilt_rate, a.u]);
    }
    for p in &row.pairs {
        v.extend([p.d, if p.f_en { 1.0 } else { 0.0 }]);
    }
    v.push(row.rms);
    v
}

/// Values of a named column, one per row.
pub fn column(trace: &Trace, name: &str) -> Option<Vec<f64>> {
    let idx = trace_columns(trace).iter().position(|c| c == name)?;
    Some(trace.rows.iter().map(|r| row_values(r)[idx]).collect())
}

/// Human description of each pair column block.
pub fn channel_label(ch: &Channel) -> String {
    match *ch {
        Channel::Edge(k) => format!("edge {k} (corrected separation)"),
        Channel::Couple(i, j) => format!("agents {i}-{j} (separation)"),
    }
}

fn fmt_full(v: f64) -> String {
    // 17 significant digits: exact round trip for every f64
    format!("{v:.16e}")
}

pub fn write_trace<W: io::Write>(trace: &Trace, mut out: W) -> io::Result<()> {
    writeln!(out, "{}", trace_columns(trace).join(","))?;
    for row in &trace.rows {
        let mut line = String::new();
        for (k, v) in row_values(row).into_iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&fmt_full(v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

fn events_field(metrics: &Metrics, kind: EventKind) -> String {
    let events = match kind {
        EventKind::Coupled => &metrics.coupling_events,
        EventKind::Uncoupled => &metrics.uncoupling_events,
    };
    if events.is_empty() {
        return "none".into();
    }
    events.iter().map(|e| format!("edge{}@{}", e.edge, e.t)).collect::<Vec<_>>().join(" ")
}

/// Stable `key: value` report of a run.
pub fn write_report(metrics: &Metrics, scenario: &Scenario) -> String {
    let mut r = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(r, "{k}: {v}");
    };
    match &metrics.rms_change {
        Ok(c) => {
            kv("rms_before", c.before.to_string());
            kv("rms_after", c.after.to_string());
            kv("delta_rms", c.delta.to_string());
            kv("delta_rms_status", "ok".into());
        }
        Err(reason) => {
            kv("rms_before", "undefined".into());
            kv("rms_after", "undefined".into());
            kv("delta_rms", "undefined".into());
            kv("delta_rms_status", format!("undefined ({reason})"));
        }
    }
    kv("coupling_events", events_field(metrics, EventKind::Coupled));
    kv("uncoupling_events", events_field(metrics, EventKind::Uncoupled));
    kv("velocity_sum_drift", metrics.velocity_sum_drift.to_string());
    kv("variant", scenario.interaction.variant.name().into());
    kv("plant.kp", scenario.plant.k_p.to_string());
    kv("plant.kd", scenario.plant.k_d.to_string());
    kv("plant.g", scenario.plant.g.to_string());
    match scenario.gain_source {
        GainSource::Poles(p) => kv("poles", format!("rl={} iml={} imr={}", p.r_l, p.im_l, p.im_r)),
        GainSource::Explicit(k) => kv("poles", format!("explicit gains {k:?}")),
    }
    match scenario.gains() {
        Ok(g) => kv(
            "gains",
            format!("k_pos={} k_vel={} k_tilt={} k_rate={} k1={}", g.k_pos, g.k_vel, g.k_tilt, g.k_rate, g.k1),
        ),
        Err(e) => kv("gains", format!("error ({e})")),
    }
    kv("interaction.c_max", scenario.interaction.c_max.to_string());
    kv("interaction.d_t", scenario.interaction.d_t.to_string());
    kv("interaction.eps", scenario.interaction.eps.to_string());
    kv("sim.dt", scenario.dt.to_string());
    kv("sim.t_end", scenario.t_end.to_string());
    kv("sim.stride", scenario.stride.to_string());
    kv("agents", scenario.agents.len().to_string());
    kv(
        "edges",
        if scenario.edges.is_empty() {
            "none".into()
        } else {
            scenario.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(" ")
        },
    );
    r
}

/// Parses a report back into ordered `(key, value)` pairs.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(": "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

const PALETTE: [&str; 8] =
    ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(raw);
    let start = (lo / step).ceil() as i64;
    let stop = (hi / step).floor() as i64;
    (start..=stop).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Line chart of `columns` against time with coupling/uncoupling markers.
pub fn render_svg(trace: &Trace, columns: &[&str]) -> Result<String> {
    if columns.is_empty() {
        return Err(Error::Domain("no columns selected for plotting".into()));
    }
    let available = trace_columns(trace);
    let mut series = Vec::with_capacity(columns.len());
    for &c in columns {
        match column(trace, c) {
            Some(v) if c != "t" => series.push((c, v)),
            _ => {
                return Err(Error::Domain(format!(
                    "unknown column `{c}`; available: {}",
                    available[1..].join(", ")
                )))
            }
        }
    }
    let times: Vec<f64> = trace.rows.iter().map(|r| r.t).collect();
    let (t0, t1) = (times.first().copied().unwrap_or(0.0), times.last().copied().unwrap_or(1.0));
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let t_span = (t1 - t0).max(f64::EPSILON);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let x = |t: f64| LEFT + (t - t0) / t_span * pw;
    let y = |v: f64| TOP + (hi - v) / (hi - lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for tv in nice_ticks(t0, t1, 8) {
        let px = x(tv);
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ccc"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 16.0,
            tick_label(tv)
        );
    }
    for vv in nice_ticks(lo, hi, 6) {
        let py = y(vv);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick_label(vv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t, s</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0
    );

    for ev in &trace.events {
        if ev.t < t0 || ev.t > t1 {
            continue;
        }
        let px = x(ev.t);
        let (color, label) = match ev.kind {
            EventKind::Coupled => ("#2ca02c", format!("coupled e{}", ev.edge)),
            EventKind::Uncoupled => ("#d62728", format!("uncoupled e{}", ev.edge)),
        };
        let _ = writeln!(
            s,
            r#"<line class="event" x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="5,4"/><text x="{:.2}" y="{:.2}" fill="{color}" font-size="10">{label} @ {:.3}</text>"#,
            TOP + ph,
            px + 3.0,
            TOP + 12.0,
            ev.t
        );
    }

    for (k, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for (t, v) in times.iter().zip(values) {
            if !pts.is_empty() {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", x(*t), y(*v));
        }
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-column="{name}" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>"#
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Velocities of every agent plus the swarm RMS.
pub fn velocity_columns(trace: &Trace) -> Vec<String> {
    let mut cols: Vec<String> = (0..trace.agent_count()).map(|i| format!("agent{i}_vel")).collect();
    cols.push("rms".into());
    cols
}

/// Separation of every pair channel.
pub fn distance_columns(trace: &Trace) -> Vec<String> {
    (0..trace.channels.len()).map(|k| format!("pair{k}_d")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{AgentSample, Event, PairSample, TraceRow};
    use crate::plant::AgentState;

    fn tiny_trace() -> Trace {
        let rows = (0..5)
            .map(|k| TraceRow {
                t: k as f64 * 0.01,
                agents: vec![
                    AgentSample { state: AgentState::new(0.1 * k as f64, 1.0 / 3.0, 0.0, 0.0), u: 0.0 },
                    AgentSample { state: AgentState::new(50.0, -1.5, 1e-17, 0.0), u: -0.05 },
                ],
                pairs: vec![PairSample { d: 50.0 - 0.1 * k as f64, f_en: k > 2 }],
                rms: 1.234_567_890_123_456_7,
            })
            .collect();
        Trace {
            dt: 0.001,
            stride: 10,
            channels: vec![Channel::Edge(0)],
            rows,
            events: vec![Event { edge: 0, kind: EventKind::Coupled, t: 0.03 }],
        }
    }

    #[test]
    fn header_layout() {
        let cols = trace_columns(&tiny_trace());
        assert_eq!(cols.len(), 1 + 2 * 5 + 2 + 1);
        assert_eq!(cols[0], "t");
        assert_eq!(cols[1], "agent0_pos");
        assert_eq!(cols[10], "agent1_u");
        assert_eq!(cols[11], "pair0_d");
        assert_eq!(cols[12], "pair0_fen");
        assert_eq!(cols.last().unwrap(), "rms");
    }

    #[test]
    fn csv_values_round_trip_exactly() {
        let tr = tiny_trace();
        let csv = trace_csv(&tr);
        let mut lines = csv.lines();
        lines.next();
        for (line, row) in lines.zip(&tr.rows) {
            let parsed: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert_eq!(parsed, row_values(row));
        }
    }

    #[test]
    fn svg_errors_and_markers() {
        let tr = tiny_trace();
        assert!(render_svg(&tr, &[]).is_err());
        let err = render_svg(&tr, &["agent9_vel"]).unwrap_err().to_string();
        assert!(err.contains("agent0_vel") && err.contains("rms"), "{err}");
        let svg = render_svg(&tr, &["agent0_vel", "agent1_vel", "rms"]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("class=\"event\"").count(), 1);
        assert_eq!(svg, render_svg(&tr, &["agent0_vel", "agent1_vel", "rms"]).unwrap());
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(nice_ticks(0.0, 40.0, 8), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]);
        assert_eq!(tick_label(-0.0), "0");
        assert_eq!(tick_label(2.5), "2.5");
    }
}
