//! Fixtures shared across integration test targets. Each target pulls
//! a different subset, so unused items are expected.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conflictkit::backend::{
    AttentionKind, AttentionMap, BackendDescriptor, InjectionSign, InjectionSpec, ModelBackend,
};
use conflictkit::categorize::Category;
use conflictkit::conflict::{
    CodeConflictKind, ConflictCase, ConflictContext, ConflictKind, DecodeParams, IntroKind,
    PKRecord, Query, StatementKind, TaskKind,
};
use conflictkit::probe::{
    LabelScheme, Probe, ProbeDataset, ProbeKind, ProbeWeights, TrainSettings,
};
use conflictkit::Error;

// ---------------------------------------------------------------------------
// Text oracle for code categorization
// ---------------------------------------------------------------------------

/// Blanks out `#` comments and string literals (single, double, and
/// triple quoted, with backslash escapes) so token scans below only
/// ever see executable text. Replaced spans become spaces, which keeps
/// surrounding tokens separated.
pub fn strip_noncode(code: &str) -> String {
    let chars: Vec<char> = code.chars().collect();
    let mut out = String::with_capacity(code.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                out.push(' ');
                i += 1;
            }
        } else if c == '\'' || c == '"' {
            let quote = c;
            let triple = i + 2 < chars.len() && chars[i + 1] == quote && chars[i + 2] == quote;
            let skip = if triple { 3 } else { 1 };
            for _ in 0..skip {
                out.push(' ');
                i += 1;
            }
            loop {
                if i >= chars.len() {
                    break;
                }
                if chars[i] == '\\' {
                    out.push(' ');
                    i += 1;
                    if i < chars.len() {
                        out.push(if chars[i] == '\n' { '\n' } else { ' ' });
                        i += 1;
                    }
                    continue;
                }
                let closes = if triple {
                    chars[i] == quote
                        && i + 2 < chars.len()
                        && chars[i + 1] == quote
                        && chars[i + 2] == quote
                } else {
                    chars[i] == quote
                };
                if closes {
                    for _ in 0..skip {
                        out.push(' ');
                        i += 1;
                    }
                    break;
                }
                out.push(if chars[i] == '\n' { '\n' } else { ' ' });
                i += 1;
            }
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// True when `name` appears as a whole identifier directly applied to
/// an argument list. A dotted prefix (`math.sqrt(`) still counts; a
/// bare reference (`map(len, xs)`), a longer identifier (`new_len(`),
/// and a `def`/`class` header do not.
pub fn oracle_calls(stripped: &str, name: &str) -> bool {
    let chars: Vec<char> = stripped.chars().collect();
    let pat: Vec<char> = name.chars().collect();
    let n = pat.len();
    let mut i = 0;
    while i + n <= chars.len() {
        if chars[i..i + n] != pat[..]
            || (i > 0 && is_ident(chars[i - 1]))
            || (i + n < chars.len() && is_ident(chars[i + n]))
        {
            i += 1;
            continue;
        }
        let mut j = i + n;
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        if j < chars.len() && chars[j] == '(' && !preceded_by_def(&chars, i) {
            return true;
        }
        i += 1;
    }
    false
}

/// Whether the identifier starting at `start` sits in a `def`/`class`
/// header, meaning the name is being bound rather than called.
fn preceded_by_def(chars: &[char], start: usize) -> bool {
    let mut k = start;
    while k > 0 && chars[k - 1].is_whitespace() && chars[k - 1] != '\n' {
        k -= 1;
    }
    let end = k;
    while k > 0 && is_ident(chars[k - 1]) {
        k -= 1;
    }
    let word: String = chars[k..end].iter().collect();
    word == "def" || word == "class"
}

const OP_CHARS: &str = "+-*/%@<>=!&|^~";

/// True when the operator occurs in the text. Symbol operators must
/// match a maximal run of operator characters exactly, so `+` never
/// matches inside `+=` or `**`. Keyword operators (`not`, `and`, `or`)
/// match as whole words.
pub fn oracle_operator(stripped: &str, lexeme: &str) -> bool {
    if lexeme.chars().all(|c| c.is_ascii_alphabetic()) {
        let chars: Vec<char> = stripped.chars().collect();
        let pat: Vec<char> = lexeme.chars().collect();
        let n = pat.len();
        let mut i = 0;
        while i + n <= chars.len() {
            if chars[i..i + n] == pat[..]
                && (i == 0 || !is_ident(chars[i - 1]))
                && (i + n == chars.len() || !is_ident(chars[i + n]))
            {
                return true;
            }
            i += 1;
        }
        return false;
    }
    let mut run = String::new();
    for c in stripped.chars().chain(std::iter::once(' ')) {
        if OP_CHARS.contains(c) {
            run.push(c);
        } else {
            if run == lexeme {
                return true;
            }
            run.clear();
        }
    }
    false
}

/// The oracle's own copy of the decision table, built purely from text
/// scans.
pub fn oracle_category(
    code: &str,
    kind: CodeConflictKind,
    target: &str,
    replacement: Option<&str>,
) -> Category {
    let stripped = strip_noncode(code);
    match kind {
        CodeConflictKind::FnDeprecate => {
            if oracle_calls(&stripped, target) {
                Category::parametric()
            } else {
                Category::conflicting()
            }
        }
        CodeConflictKind::OpDeprecate => {
            if oracle_operator(&stripped, target) {
                Category::parametric()
            } else {
                Category::conflicting()
            }
        }
        CodeConflictKind::FnReplace => {
            let orig = oracle_calls(&stripped, target);
            let repl = oracle_calls(&stripped, replacement.expect("replacement name"));
            match (orig, repl) {
                (true, false) => Category::parametric(),
                (false, true) => Category::conflicting(),
                (true, true) => Category::other_both(),
                (false, false) => Category::other_neither(),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Hand-labeled snippet corpus
// ---------------------------------------------------------------------------

pub struct Snippet {
    pub code: &'static str,
    pub kind: CodeConflictKind,
    pub target: &'static str,
    pub replacement: Option<&'static str>,
    pub label: Category,
}

pub fn snippet(
    code: &'static str,
    kind: CodeConflictKind,
    target: &'static str,
    replacement: Option<&'static str>,
    label: Category,
) -> Snippet {
    Snippet {
        code,
        kind,
        target,
        replacement,
        label,
    }
}

pub fn context_for(snip: &Snippet) -> ConflictContext {
    let mut fill = BTreeMap::new();
    fill.insert("target".to_string(), snip.target.to_string());
    if let Some(repl) = snip.replacement {
        fill.insert("replacement".to_string(), repl.to_string());
    }
    ConflictContext {
        kind: ConflictKind::Code {
            kind: snip.kind,
            intro: IntroKind::Default,
        },
        text: String::new(),
        ck_payload: snip.target.to_string(),
        template_fill: fill,
    }
}

pub fn corpus() -> Vec<Snippet> {
    use CodeConflictKind::{FnDeprecate, FnReplace, OpDeprecate};
    let p = Category::parametric();
    let c = Category::conflicting();
    let ob = Category::other_both();
    let on = Category::other_neither();
    vec![
        // Deprecated function `len`.
        snippet(
            "def count_items(xs):\n    return len(xs)\n",
            FnDeprecate,
            "len",
            None,
            p,
        ),
        snippet(
            "def count_items(xs):\n    total = 0\n    for _ in xs:\n        total = total + 1\n    return total\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        snippet(
            "def count_items(xs):\n    return sum(1 for _ in xs)\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        // The banned name may appear in comments without being used.
        snippet(
            "def count_items(xs):\n    # len is deprecated, never write len( again\n    return sum(1 for _ in xs)\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        // ... or in string literals.
        snippet(
            "def count_items(xs):\n    note = \"len(xs) is gone\"\n    return sum(1 for _ in xs)\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        // Dunder spelling is a different callee.
        snippet(
            "def count_items(xs):\n    return xs.__len__()\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        snippet(
            "def count_items(xs):\n    return max(len(xs), 0)\n",
            FnDeprecate,
            "len",
            None,
            p,
        ),
        // Passing the function by reference is not a call site.
        snippet(
            "def count_items(xs):\n    sizes = map(len, xs)\n    return sum(1 for _ in sizes)\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        // Calling through an alias hides the name from both analyses.
        snippet(
            "def count_items(xs):\n    g = len\n    return g(xs)\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        snippet(
            "def length(xs):\n    n = 0\n    for _ in xs:\n        n += 1\n    return n\n",
            FnDeprecate,
            "len",
            None,
            c,
        ),
        // Deprecated function `sum`.
        snippet(
            "def total(xs):\n    return sum(xs)\n",
            FnDeprecate,
            "sum",
            None,
            p,
        ),
        snippet(
            "def total(xs):\n    acc = 0\n    for x in xs:\n        acc += x\n    return acc\n",
            FnDeprecate,
            "sum",
            None,
            c,
        ),
        snippet(
            "def total(xs):\n    import functools\n    return functools.reduce(lambda a, b: a + b, xs, 0)\n",
            FnDeprecate,
            "sum",
            None,
            c,
        ),
        // `fsum` contains the letters but is a different identifier.
        snippet(
            "import math\n\ndef total(xs):\n    return math.fsum(xs)\n",
            FnDeprecate,
            "sum",
            None,
            c,
        ),
        // Deprecated function `sorted`.
        snippet(
            "def sort_words(ws):\n    return sorted(ws)\n",
            FnDeprecate,
            "sorted",
            None,
            p,
        ),
        snippet(
            "def sort_words(ws):\n    out = list(ws)\n    out.sort()\n    return out\n",
            FnDeprecate,
            "sorted",
            None,
            c,
        ),
        snippet(
            "def sort_words(ws):\n    out = list(ws)\n    for i in range(len(out)):\n        for j in range(i + 1, len(out)):\n            if out[j] < out[i]:\n                out[i], out[j] = out[j], out[i]\n    return out\n",
            FnDeprecate,
            "sorted",
            None,
            c,
        ),
        // Deprecated function `abs`.
        snippet(
            "def magnitude(x):\n    return abs(x)\n",
            FnDeprecate,
            "abs",
            None,
            p,
        ),
        snippet(
            "def magnitude(x):\n    if x < 0:\n        return -x\n    return x\n",
            FnDeprecate,
            "abs",
            None,
            c,
        ),
        // Method calls count by attribute name.
        snippet(
            "def collect(xs):\n    out = []\n    for x in xs:\n        out.append(x)\n    return out\n",
            FnDeprecate,
            "append",
            None,
            p,
        ),
        snippet(
            "def collect(xs):\n    out = []\n    for x in xs:\n        out = out + [x]\n    return out\n",
            FnDeprecate,
            "append",
            None,
            c,
        ),
        // Qualified calls count too.
        snippet(
            "import math\n\ndef hypotenuse(a, b):\n    return math.sqrt(a * a + b * b)\n",
            FnDeprecate,
            "sqrt",
            None,
            p,
        ),
        snippet(
            "def hypotenuse(a, b):\n    return (a * a + b * b) ** 0.5\n",
            FnDeprecate,
            "sqrt",
            None,
            c,
        ),
        // Deprecated operator `+`.
        snippet(
            "def add(a, b):\n    return a + b\n",
            OpDeprecate,
            "+",
            None,
            p,
        ),
        snippet(
            "def add(a, b):\n    return sum([a, b])\n",
            OpDeprecate,
            "+",
            None,
            c,
        ),
        // Augmented assignment is its own operator, not a use of `+`.
        snippet(
            "def concat_all(parts):\n    out = \"\"\n    for p in parts:\n        out += p\n    return out\n",
            OpDeprecate,
            "+",
            None,
            c,
        ),
        snippet(
            "def concat_all(parts):\n    return \"\".join(parts)\n",
            OpDeprecate,
            "+",
            None,
            c,
        ),
        snippet(
            "def add(a, b):\n    # the + operator is banned here\n    return sum([a, b])\n",
            OpDeprecate,
            "+",
            None,
            c,
        ),
        // Unary plus is still a `+`.
        snippet("def bump(x):\n    return +x\n", OpDeprecate, "+", None, p),
        snippet(
            "def join_label(a, b):\n    sep = \" + \"\n    return \"\".join([a, sep, b])\n",
            OpDeprecate,
            "+",
            None,
            c,
        ),
        // Deprecated operator `==`.
        snippet(
            "def is_zero(x):\n    return x == 0\n",
            OpDeprecate,
            "==",
            None,
            p,
        ),
        snippet(
            "def is_zero(x):\n    return not x\n",
            OpDeprecate,
            "==",
            None,
            c,
        ),
        snippet(
            "def same(a, b):\n    return a.__eq__(b)\n",
            OpDeprecate,
            "==",
            None,
            c,
        ),
        // `<=` and `>=` are maximal runs of their own.
        snippet(
            "def clamp01(x):\n    if x <= 0:\n        return 0\n    if x >= 1:\n        return 1\n    return x\n",
            OpDeprecate,
            "==",
            None,
            c,
        ),
        // Deprecated operator `*`.
        snippet(
            "def double(x):\n    return x * 2\n",
            OpDeprecate,
            "*",
            None,
            p,
        ),
        snippet(
            "def double(x):\n    return x + x\n",
            OpDeprecate,
            "*",
            None,
            c,
        ),
        // Deprecated operator `//`; plain `/` must not satisfy it.
        snippet(
            "def half_floor(x):\n    return x // 2\n",
            OpDeprecate,
            "//",
            None,
            p,
        ),
        snippet(
            "import math\n\ndef half_floor(x):\n    return math.floor(x / 2)\n",
            OpDeprecate,
            "//",
            None,
            c,
        ),
        // Deprecated operator `+=`; spelling it out as `x = x + 1` avoids it.
        snippet(
            "def running(xs):\n    acc = 0\n    for x in xs:\n        acc += x\n    return acc\n",
            OpDeprecate,
            "+=",
            None,
            p,
        ),
        snippet(
            "def running(xs):\n    acc = 0\n    for x in xs:\n        acc = acc + x\n    return acc\n",
            OpDeprecate,
            "+=",
            None,
            c,
        ),
        snippet(
            "def running(xs):\n    return sum(xs)\n",
            OpDeprecate,
            "+=",
            None,
            c,
        ),
        // Deprecated keyword operator `not`.
        snippet(
            "def is_empty(xs):\n    return not xs\n",
            OpDeprecate,
            "not",
            None,
            p,
        ),
        snippet(
            "def is_empty(xs):\n    return len(xs) == 0\n",
            OpDeprecate,
            "not",
            None,
            c,
        ),
        // Deprecated keyword operator `and`.
        snippet(
            "def both(a, b):\n    return a and b\n",
            OpDeprecate,
            "and",
            None,
            p,
        ),
        snippet(
            "def both(a, b):\n    if a:\n        return bool(b)\n    return False\n",
            OpDeprecate,
            "and",
            None,
            c,
        ),
        // Replacement: len -> new_len.
        snippet(
            "def count_items(xs):\n    return len(xs)\n",
            FnReplace,
            "len",
            Some("new_len"),
            p,
        ),
        snippet(
            "def count_items(xs):\n    return new_len(xs)\n",
            FnReplace,
            "len",
            Some("new_len"),
            c,
        ),
        snippet(
            "def count_items(xs):\n    n = new_len(xs)\n    assert n == len(xs)\n    return n\n",
            FnReplace,
            "len",
            Some("new_len"),
            ob,
        ),
        snippet(
            "def count_items(xs):\n    return sum(1 for _ in xs)\n",
            FnReplace,
            "len",
            Some("new_len"),
            on,
        ),
        // Replacement: sorted -> new_sorted.
        snippet(
            "def sort_words(ws):\n    return sorted(ws)\n",
            FnReplace,
            "sorted",
            Some("new_sorted"),
            p,
        ),
        snippet(
            "def sort_words(ws):\n    return new_sorted(ws)\n",
            FnReplace,
            "sorted",
            Some("new_sorted"),
            c,
        ),
        snippet(
            "def sort_words(ws):\n    if hasattr(__builtins__, \"sorted\"):\n        return sorted(ws)\n    return new_sorted(ws)\n",
            FnReplace,
            "sorted",
            Some("new_sorted"),
            ob,
        ),
        // A reference to the replacement plus a differently named method
        // call leaves both sides unused.
        snippet(
            "def sort_words(ws):\n    f = new_sorted\n    out = list(ws)\n    out.sort()\n    return out\n",
            FnReplace,
            "sorted",
            Some("new_sorted"),
            on,
        ),
        snippet(
            "def sort_words(ws):\n    out = []\n    for w in ws:\n        i = 0\n        while i < len(out) and out[i] < w:\n            i += 1\n        out.insert(i, w)\n    return out\n",
            FnReplace,
            "sorted",
            Some("new_sorted"),
            on,
        ),
        // Replacement: sum -> new_sum.
        snippet(
            "def total(xs):\n    return sum(xs)\n",
            FnReplace,
            "sum",
            Some("new_sum"),
            p,
        ),
        snippet(
            "def total(xs):\n    return new_sum(xs)\n",
            FnReplace,
            "sum",
            Some("new_sum"),
            c,
        ),
        snippet(
            "def total(xs):\n    return new_sum(xs) if callable(new_sum) else sum(xs)\n",
            FnReplace,
            "sum",
            Some("new_sum"),
            ob,
        ),
        snippet(
            "def total(xs):\n    acc = 0\n    for x in xs:\n        acc = acc + x\n    return acc\n",
            FnReplace,
            "sum",
            Some("new_sum"),
            on,
        ),
    ]
}

// ---------------------------------------------------------------------------
// Synthetic probe datasets
// ---------------------------------------------------------------------------

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; u is bounded away from zero so ln stays finite.
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u.ln()).sqrt() * v.cos()
}

/// Two spherical unit-variance Gaussians in `dim` dimensions with means
/// at +/- 4 sigma along a random unit direction, `n_per_class` samples
/// each.
pub fn gaussian_clusters(dim: usize, n_per_class: usize, seed: u64) -> ProbeDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut direction: Vec<f64> = (0..dim).map(|_| normal(&mut rng)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    direction.iter_mut().for_each(|v| *v /= norm);

    let mut x = Vec::with_capacity(2 * n_per_class);
    let mut y = Vec::with_capacity(2 * n_per_class);
    for class in 0..2u8 {
        let sign = if class == 0 { -4.0 } else { 4.0 };
        for _ in 0..n_per_class {
            let row: Vec<f64> = direction
                .iter()
                .map(|d| sign * d + normal(&mut rng))
                .collect();
            x.push(row);
            y.push(class);
        }
    }
    ProbeDataset::new(0, x, y, LabelScheme::ByResponseCategory).unwrap()
}

/// Noisy XOR with exact central symmetry: every sampled point is paired
/// with its negation (same label) so no linear boundary can beat chance
/// on the full set.
pub fn xor_dataset(n_per_quadrant: usize, seed: u64) -> ProbeDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n_per_quadrant {
        for (center, label) in [([1.0, 1.0], 0u8), ([1.0, -1.0], 1u8)] {
            let px = center[0] + 0.2 * normal(&mut rng);
            let py = center[1] + 0.2 * normal(&mut rng);
            x.push(vec![px, py]);
            y.push(label);
            x.push(vec![-px, -py]);
            y.push(label);
        }
    }
    ProbeDataset::new(0, x, y, LabelScheme::ByResponseCategory).unwrap()
}

// ---------------------------------------------------------------------------
// Pipeline run configs
// ---------------------------------------------------------------------------

/// Absolute path to a file at the workspace root, so tests work no
/// matter which directory cargo runs them from.
pub fn workspace_file(rel: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
        .canonicalize()
        .unwrap_or_else(|e| panic!("missing workspace file {rel}: {e}"))
}

/// The toy World Capitals run: 60 conflict cases, sentinel-planted
/// contexts, probing by context type, and steering against the conflict
/// direction.
pub fn toy_run_config(output: &std::path::Path) -> conflictkit::config::Config {
    let mut cfg = conflictkit::config::Config::new();
    cfg.set("task", "wc");
    cfg.set(
        "data.path",
        workspace_file("data/world_capitals.csv").display().to_string(),
    );
    cfg.set("output", output.display().to_string());
    cfg.set("seed", "42");
    cfg.set("backend.kind", "toy");
    cfg.set("toy.n_layers", "4");
    cfg.set("toy.hidden_dim", "16");
    cfg.set("toy.plant_sentinel", "true");
    cfg.set("conflict.statement_kinds", "default");
    cfg.set("conflict.n_obs", "6");
    cfg.set("conflict.pairs_per_obs", "10");
    cfg.set("decode.max_new_tokens", "32");
    cfg.set("decode.temperature", "0");
    cfg.set("probe.scheme", "by_context_type");
    cfg.set("probe.train_fraction", "0.8");
    cfg.set("probe.seeds", "1, 10, 42, 99, 777");
    cfg.set("steer.coefficient", "-1.0");
    cfg.set("steer.scope", "all_positions");
    cfg.set("steer.n_prompts", "100");
    cfg
}

// ---------------------------------------------------------------------------
// Steering fixtures
// ---------------------------------------------------------------------------

/// A hand-built linear probe whose weight vector serves as theta.
pub fn linear_probe(w: Vec<f64>, layer: usize) -> Probe {
    Probe {
        kind: ProbeKind::Linear,
        layer,
        weights: ProbeWeights::Linear { w, b: 0.1 },
        train_seed: 1,
        test_accuracy: None,
        converged: true,
        settings: TrainSettings::default(),
        train_class_counts: [1, 1],
        dataset_fingerprint: "fixture00".into(),
    }
}

/// Replays canned steered responses keyed by prompt and injection sign.
pub struct FixtureBackend;

impl FixtureBackend {
    fn respond(prompt: &str, sign: InjectionSign) -> &'static str {
        match (prompt, sign) {
            ("p2", InjectionSign::Plus) => "PK",
            ("p3", InjectionSign::Plus) => "PK",
            ("p4", InjectionSign::Plus) => "NEITHER",
            ("p1", InjectionSign::Minus) => "CK",
            ("p4", InjectionSign::Minus) => "NEITHER",
            other => panic!("unexpected steering request {other:?}"),
        }
    }
}

impl ModelBackend for FixtureBackend {
    fn descriptor(&self) -> BackendDescriptor {
        BackendDescriptor {
            name: "fixture".into(),
            n_layers: 1,
            hidden_dim: 4,
            deterministic: true,
        }
    }

    fn generate(&self, _prompt: &str, _params: &DecodeParams) -> conflictkit::Result<String> {
        Err(Error::BackendFailure("fixture only steers".into()))
    }

    fn capture_residual(
        &self,
        _prompt: &str,
        _layers: &[usize],
    ) -> conflictkit::Result<Vec<Vec<f32>>> {
        Err(Error::BackendFailure("fixture only steers".into()))
    }

    fn generate_with_injection(
        &self,
        prompt: &str,
        spec: &InjectionSpec,
        _params: &DecodeParams,
    ) -> conflictkit::Result<String> {
        Ok(Self::respond(prompt, spec.sign).to_string())
    }

    fn attention_maps(
        &self,
        _prompt: &str,
        _response: &str,
        _kind: AttentionKind,
    ) -> conflictkit::Result<Vec<AttentionMap>> {
        Err(Error::AttentionUnavailable("fixture".into()))
    }
}

/// A QA conflict case whose prompt is just `p<n>`, for pairing with the
/// fixture backend above.
pub fn qa_case(n: usize) -> ConflictCase {
    let id = format!("q{n}");
    ConflictCase {
        query: Query {
            id: id.clone(),
            task: TaskKind::Wc,
            text: "What is the capital?".into(),
            meta: BTreeMap::new(),
        },
        pk: PKRecord {
            query_id: id,
            pk_answer: "PK".into(),
            pk_extracted: Some("PK".into()),
            decode_params: DecodeParams::default(),
        },
        context: ConflictContext {
            kind: ConflictKind::Qa {
                statement: StatementKind::Default,
            },
            text: "context".into(),
            ck_payload: format!("CK{n}"),
            template_fill: BTreeMap::new(),
        },
        prompt_text: format!("p{n}"),
    }
}

/// Maps the fixture backend's canned responses onto categories and
/// success conditions.
pub fn fixture_eval(
    _case: &ConflictCase,
    resp: &str,
) -> conflictkit::Result<(Category, conflictkit::categorize::CondEval)> {
    use conflictkit::categorize::CondEval;
    Ok(match resp {
        "PK" => (
            Category::parametric(),
            CondEval {
                c_pk: true,
                c_ck: false,
            },
        ),
        "CK" => (
            Category::conflicting(),
            CondEval {
                c_pk: false,
                c_ck: true,
            },
        ),
        _ => (
            Category::other_neither(),
            CondEval {
                c_pk: false,
                c_ck: false,
            },
        ),
    })
}
