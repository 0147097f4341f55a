//! Tiny deterministic SVG emitters for the report stage.
//!
//! Hand-rolled on purpose: the charts are two fixed-size documents and
//! their bytes must be identical across reruns, which rules out
//! plotting crates that embed timestamps or nondeterministic ids.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 64.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa7", "#9c755f",
];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" ",
            "viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n",
            "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
            "<text x=\"{tx:.1}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n"
        ),
        w = WIDTH,
        h = HEIGHT,
        tx = WIDTH / 2.0,
        title = esc(title),
    )
}

fn fmt_tick(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

/// One polyline over (x, y) points, y axis covering at least [0, 1]
/// when the data fits there.
pub(crate) fn line_plot_svg(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[(f64, f64)],
) -> String {
    let right = 24.0;
    let plot_w = WIDTH - LEFT - right;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let mut out = header(title);

    if points.is_empty() {
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">no data</text>\n</svg>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        return out;
    }

    let (mut x_min, mut x_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    if x_min == x_max {
        x_min -= 0.5;
        x_max += 0.5;
    }
    let (data_y_min, data_y_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    let (y_min, y_max) = if data_y_min >= 0.0 && data_y_max <= 1.0 {
        (0.0, 1.0)
    } else {
        let pad = 0.05 * (data_y_max - data_y_min).max(1.0);
        (data_y_min - pad, data_y_max + pad)
    };

    let sx = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    // Axes.
    out.push_str(&format!(
        "<line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
        l = LEFT,
        t = TOP,
        b = TOP + plot_h,
        r = LEFT + plot_w,
    ));
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let v = y_min + frac * (y_max - y_min);
        let y = sy(v);
        out.push_str(&format!(
            "<line x1=\"{l:.1}\" y1=\"{y:.1}\" x2=\"{r:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{tx:.1}\" y=\"{ty:.1}\" font-size=\"11\" text-anchor=\"end\">{v}</text>\n",
            l = LEFT,
            r = LEFT + plot_w,
            y = y,
            tx = LEFT - 6.0,
            ty = y + 4.0,
            v = format!("{:.2}", v),
        ));
    }
    for (x, _) in points {
        let px = sx(*x);
        out.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{ty:.1}\" font-size=\"11\" text-anchor=\"middle\">{v}</text>\n",
            px = px,
            ty = TOP + plot_h + 16.0,
            v = fmt_tick(*x),
        ));
    }
    out.push_str(&format!(
        "<text x=\"{x:.1}\" y=\"{y:.1}\" font-size=\"12\" text-anchor=\"middle\">{label}</text>\n",
        x = LEFT + plot_w / 2.0,
        y = HEIGHT - 14.0,
        label = esc(x_label),
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{y:.1}\" font-size=\"12\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {y:.1})\">{label}</text>\n",
        y = TOP + plot_h / 2.0,
        label = esc(y_label),
    ));

    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{:.1},{:.1}", sx(*x), sy(*y)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
        coords.join(" "),
        PALETTE[0],
    ));
    for (x, y) in points {
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{}\"/>\n",
            sx(*x),
            sy(*y),
            PALETTE[0],
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// One normalized stacked bar per group, segments bottom-up in the
/// given order, legend on the right.
pub(crate) fn stacked_bars_svg(
    title: &str,
    segments: &[&str],
    groups: &[(String, Vec<f64>)],
) -> String {
    let right = 140.0;
    let plot_w = WIDTH - LEFT - right;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let mut out = header(title);

    if groups.is_empty() {
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">no data</text>\n</svg>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        return out;
    }

    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let y = TOP + plot_h - frac * plot_h;
        out.push_str(&format!(
            "<line x1=\"{l:.1}\" y1=\"{y:.1}\" x2=\"{r:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{tx:.1}\" y=\"{ty:.1}\" font-size=\"11\" text-anchor=\"end\">{v:.0}%</text>\n",
            l = LEFT,
            r = LEFT + plot_w,
            y = y,
            tx = LEFT - 6.0,
            ty = y + 4.0,
            v = frac * 100.0,
        ));
    }

    let slot = plot_w / groups.len() as f64;
    let bar_w = slot * 0.6;
    for (gi, (name, values)) in groups.iter().enumerate() {
        let x = LEFT + gi as f64 * slot + slot * 0.2;
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            let mut offset = 0.0;
            for (si, v) in values.iter().enumerate() {
                let h = v / total * plot_h;
                let y = TOP + plot_h - offset - h;
                out.push_str(&format!(
                    "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{h:.1}\" \
                     fill=\"{fill}\" stroke=\"white\" stroke-width=\"0.5\"/>\n",
                    x = x,
                    y = y,
                    w = bar_w,
                    h = h,
                    fill = PALETTE[si % PALETTE.len()],
                ));
                offset += h;
            }
        }
        out.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{ty:.1}\" font-size=\"11\" text-anchor=\"middle\">{name}</text>\n",
            cx = x + bar_w / 2.0,
            ty = TOP + plot_h + 16.0,
            name = esc(name),
        ));
    }

    for (si, seg) in segments.iter().enumerate() {
        let y = TOP + si as f64 * 18.0;
        out.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"11\" height=\"11\" fill=\"{fill}\"/>\n\
             <text x=\"{tx:.1}\" y=\"{ty:.1}\" font-size=\"11\">{seg}</text>\n",
            x = WIDTH - right + 12.0,
            y = y,
            fill = PALETTE[si % PALETTE.len()],
            tx = WIDTH - right + 28.0,
            ty = y + 10.0,
            seg = esc(seg),
        ));
    }
    out.push_str("</svg>\n");
    out
}
