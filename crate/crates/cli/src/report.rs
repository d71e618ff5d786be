//! Cluster-quality metrics and a 2-D PCA scatter of the clustered words.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use psda_core::{ClusterModel, Element, StageClusters};

/// Projects rows onto the two leading principal axes. Each axis is signed
/// so that its largest-magnitude loading is positive.
pub fn pca_2d(points: &[Vec<f64>]) -> Vec<[f64; 2]> {
    let n = points.len();
    let d = points.first().map_or(0, Vec::len);
    if n == 0 || d == 0 {
        return vec![[0.0, 0.0]; n];
    }
    let x = DMatrix::from_fn(n, d, |i, j| points[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let axes: Vec<Vec<f64>> = order
        .iter()
        .take(2)
        .map(|&c| {
            let v: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
            let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if pivot < 0.0 { v.iter().map(|x| -x).collect() } else { v }
        })
        .collect();
    (0..n)
        .map(|i| {
            let mut out = [0.0; 2];
            for (a, axis) in axes.iter().enumerate() {
                out[a] = (0..d).map(|j| centered[(i, j)] * axis[j]).sum();
            }
            out
        })
        .collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Compactness of one cluster among its siblings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterCompactness {
    /// Mean pairwise distance between members; 0 for a singleton.
    pub intra: f64,
    /// Smallest mean member-to-member distance to another cluster; `None`
    /// when there is no other cluster.
    pub nearest_other: Option<f64>,
}

/// Per-cluster compactness given each point's cluster label.
pub fn compactness(points: &[Vec<f64>], labels: &[usize]) -> BTreeMap<usize, ClusterCompactness> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mean_between = |a: &[usize], b: &[usize]| {
        let mut s = 0.0;
        let mut n = 0usize;
        for &i in a {
            for &j in b {
                if i != j {
                    s += dist(&points[i], &points[j]);
                    n += 1;
                }
            }
        }
        if n == 0 { 0.0 } else { s / n as f64 }
    };
    groups
        .iter()
        .map(|(&l, members)| {
            let intra = mean_between(members, members);
            let nearest_other = groups
                .iter()
                .filter(|(&o, _)| o != l)
                .map(|(_, others)| mean_between(members, others))
                .min_by(f64::total_cmp);
            (l, ClusterCompactness { intra, nearest_other })
        })
        .collect()
}

/// Mean silhouette `(b - a) / max(a, b)` over points, with `a` the mean
/// distance to the rest of the point's cluster and `b` the smallest mean
/// distance to another cluster. Singletons score 0. `None` with fewer than
/// two clusters.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Option<f64> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    if groups.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    for (i, &l) in labels.iter().enumerate() {
        let own = &groups[&l];
        if own.len() == 1 {
            continue;
        }
        let a = own.iter().filter(|&&j| j != i).map(|&j| dist(&points[i], &points[j])).sum::<f64>()
            / (own.len() - 1) as f64;
        let b = groups
            .iter()
            .filter(|(&o, _)| o != l)
            .map(|(_, m)| m.iter().map(|&j| dist(&points[i], &points[j])).sum::<f64>() / m.len() as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Some(total / labels.len() as f64)
}

/// Data points a stage clustered: word embeddings for a language stage,
/// expert-weighted centers of the lower stage otherwise.
pub fn stage_points(model: &ClusterModel, stage: &StageClusters) -> Option<Vec<Vec<f64>>> {
    let mut weighted: BTreeMap<&str, Vec<Vec<f64>>> = BTreeMap::new();
    let mut points = Vec::with_capacity(stage.elements.len());
    let mut word_index: Option<BTreeMap<&str, usize>> = None;
    for el in &stage.elements {
        match el {
            Element::Word { word } => {
                let table = model.words.get(&stage.scope_id)?;
                let idx = word_index
                    .get_or_insert_with(|| table.words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect());
                points.push(table.embeddings[*idx.get(word.as_str())?].clone());
            }
            Element::Cluster { scope, cluster } => {
                if !weighted.contains_key(scope.as_str()) {
                    let child = model.single.get(scope).or_else(|| model.family.get(scope))?;
                    weighted.insert(scope.as_str(), psda_core::domino::weighted_centers(child));
                }
                points.push(weighted[scope.as_str()].get(*cluster)?.clone());
            }
        }
    }
    Some(points)
}

/// One row per clustered word, in language then store order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordRow {
    pub word: String,
    pub lang: String,
    pub single: usize,
    pub family: usize,
    pub multi: usize,
    pub xy: [f64; 2],
    pub intra: f64,
    pub nearest_other: Option<f64>,
}

pub fn word_rows(model: &ClusterModel) -> Vec<WordRow> {
    let mut meta = Vec::new();
    let mut points = Vec::new();
    for (lang, table) in &model.words {
        for (w, e) in table.words.iter().zip(&table.embeddings) {
            if let Some(c) = model.chain_of(lang, w) {
                meta.push((w.clone(), lang.clone(), c));
                points.push(e.clone());
            }
        }
    }
    let labels: Vec<usize> = meta.iter().map(|(_, _, c)| c.multi).collect();
    let comp = compactness(&points, &labels);
    let xy = pca_2d(&points);
    meta.into_iter()
        .zip(xy)
        .map(|((word, lang, c), xy)| WordRow {
            word,
            lang,
            single: c.single,
            family: c.family,
            multi: c.multi,
            xy,
            intra: comp[&c.multi].intra,
            nearest_other: comp[&c.multi].nearest_other,
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn comment_header(config: &BTreeMap<String, String>) -> String {
    config.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
}

pub fn rows_csv(rows: &[WordRow], config: &BTreeMap<String, String>) -> String {
    let mut s = comment_header(config);
    s.push_str("word,lang,single,family,multi,x,y,intra,nearest_other\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.word),
            csv_field(&r.lang),
            r.single,
            r.family,
            r.multi,
            r.xy[0],
            r.xy[1],
            r.intra,
            r.nearest_other.map_or(String::new(), |v| v.to_string())
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageMetrics {
    pub stage: &'static str,
    pub scope: String,
    pub elements: usize,
    pub clusters: usize,
    pub weight_sum: f64,
    pub em_iterations: usize,
    pub converged: bool,
    pub mean_intra: f64,
    pub mean_nearest_other: Option<f64>,
    pub silhouette: Option<f64>,
}

pub fn stage_metrics(model: &ClusterModel) -> Vec<StageMetrics> {
    let tagged = model
        .single
        .values()
        .map(|s| ("single", s))
        .chain(model.family.values().map(|s| ("family", s)))
        .chain(std::iter::once(("multi", &model.multi)));
    tagged
        .map(|(stage, s)| {
            let labels: Vec<usize> = (0..s.elements.len()).map(|i| s.cluster_of(i)).collect();
            let (mean_intra, mean_nearest_other, sil) = match stage_points(model, s) {
                Some(points) => {
                    let comp = compactness(&points, &labels);
                    let n = comp.len().max(1) as f64;
                    let intra = comp.values().map(|c| c.intra).sum::<f64>() / n;
                    let others: Vec<f64> = comp.values().filter_map(|c| c.nearest_other).collect();
                    let nearest = (!others.is_empty()).then(|| others.iter().sum::<f64>() / others.len() as f64);
                    (intra, nearest, silhouette(&points, &labels))
                }
                None => (f64::NAN, None, None),
            };
            StageMetrics {
                stage,
                scope: s.scope_id.clone(),
                elements: s.elements.len(),
                clusters: s.clusters.len(),
                weight_sum: s.weight_sum(),
                em_iterations: s.em_iterations,
                converged: s.converged,
                mean_intra,
                mean_nearest_other,
                silhouette: sil,
            }
        })
        .collect()
}

pub fn stage_csv(metrics: &[StageMetrics], config: &BTreeMap<String, String>) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    let mut s = comment_header(config);
    s.push_str("stage,scope,elements,clusters,weight_sum,em_iterations,converged,mean_intra,mean_nearest_other,silhouette\n");
    for m in metrics {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            m.stage,
            csv_field(&m.scope),
            m.elements,
            m.clusters,
            m.weight_sum,
            m.em_iterations,
            m.converged,
            m.mean_intra,
            opt(m.mean_nearest_other),
            opt(m.silhouette)
        );
    }
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Evenly spaced hues, one per multi-language cluster id.
fn colour(cluster: usize, clusters: usize) -> String {
    let hue = (cluster as f64 * 360.0 / clusters.max(1) as f64) % 360.0;
    format!("hsl({hue:.1},65%,45%)")
}

pub fn scatter_svg(rows: &[WordRow], clusters: usize, config: &BTreeMap<String, String>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const PAD: f64 = 40.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in rows {
        x0 = x0.min(r.xy[0]);
        x1 = x1.max(r.xy[0]);
        y0 = y0.min(r.xy[1]);
        y1 = y1.max(r.xy[1]);
    }
    let span = |lo: f64, hi: f64| if hi - lo > 1e-12 { hi - lo } else { 1.0 };
    let (sx, sy) = (span(x0, x1), span(y0, y1));
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    s.push_str("<title>Word embeddings by multi-language cluster (PCA)</title>\n<desc>\n");
    for (k, v) in config {
        let _ = writeln!(s, "{} = {}", xml_escape(k), xml_escape(v));
    }
    s.push_str("</desc>\n");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    for r in rows {
        let cx = if x1 > x0 { PAD + (r.xy[0] - x0) / sx * (W - 2.0 * PAD) } else { W / 2.0 };
        let cy = if y1 > y0 { H - PAD - (r.xy[1] - y0) / sy * (H - 2.0 * PAD) } else { H / 2.0 };
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{}"><title>{} ({}) multi {}</title></circle>"#,
            colour(r.multi, clusters),
            xml_escape(&r.word),
            xml_escape(&r.lang),
            r.multi
        );
    }
    s.push_str("</svg>\n");
    s
}
