//! Synthetic corpus generator: plants a cohort of focal authors whose
//! publication histories, collaborator pools, venues, and texts realize
//! class-conditional feature statistics, so the full pipeline can be
//! exercised end to end without proprietary data.
//!
//! Count-like features (articles, citations, weighted degree) are drawn
//! with exact class means: articles as 1 + Poisson, citations and weighted
//! degree as gamma variables with unbiased stochastic rounding. A per-author
//! lognormal latent factor (unit mean) couples those draws within a class
//! without shifting them. Career growth is drawn independently of the
//! latent, so which planted stars clear any growth threshold is unrelated
//! to their feature values.

use crate::config::PipelineConfig;
use crate::corpus::{tier_venues, AuthorRef, Ethnicity, Gender, PublicationRecord, SjrTable, VenueTier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("infeasible spec: {0}")]
    Infeasible(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Mean, standard deviation, and clamp range for one generated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParam {
    pub mean: f64,
    pub sigma: f64,
    pub min: f64,
    pub max: f64,
}

impl GenParam {
    const fn new(mean: f64, sigma: f64, min: f64, max: f64) -> Self {
        GenParam { mean, sigma, min, max }
    }
}

/// Class-conditional generator parameters for one label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassGen {
    pub articles: GenParam,
    pub citations: GenParam,
    pub weighted_degree: GenParam,
    pub degree: GenParam,
    pub h_index: GenParam,
    pub growth_rate: GenParam,
    /// Relative A/B/C venue frequencies for this class's papers.
    pub tier_weights: [f64; 3],
    /// Probability a collaborator shares the focal author's attribute.
    pub gender_match: f64,
    pub ethnicity_match: f64,
    pub country_match: f64,
    pub field_match: f64,
    /// Fraction of a paper's tokens drawn from the author's home field.
    pub home_field_mix: f64,
    /// Collaborator debuts spread over this many years before the cohort.
    pub collaborator_age_spread: u32,
    /// Probability a paper reuses the previous paper's coauthor block
    /// instead of rotating to fresh pool members.
    pub team_loyalty: f64,
    /// Splits the class into two archetypes: one with count features scaled
    /// by (1 + shift) and near-homogeneous collaborations, one scaled by
    /// (1 - shift) with highly diverse collaborations. Class means are
    /// unchanged; 0 disables the split.
    pub archetype_shift: f64,
}

impl ClassGen {
    /// Rising-star column defaults.
    pub fn rising() -> Self {
        ClassGen {
            articles: GenParam::new(2.82, 1.74, 1.0, 10.0),
            citations: GenParam::new(42.89, 41.27, 0.0, 237.0),
            weighted_degree: GenParam::new(13.12, 12.02, 1.0, 76.0),
            degree: GenParam::new(10.8, 9.56, 1.0, 63.0),
            h_index: GenParam::new(1.79, 0.95, 0.0, 5.0),
            growth_rate: GenParam::new(0.74, 0.24, 0.6, 2.2),
            tier_weights: [0.29, 1.35, 1.18],
            gender_match: 0.55,
            ethnicity_match: 0.45,
            country_match: 0.60,
            field_match: 0.45,
            home_field_mix: 0.70,
            collaborator_age_spread: 15,
            team_loyalty: 0.30,
            archetype_shift: 0.55,
        }
    }

    /// Non-rising column defaults.
    pub fn non_rising() -> Self {
        ClassGen {
            articles: GenParam::new(1.25, 0.67, 1.0, 13.0),
            citations: GenParam::new(19.63, 35.1, 0.0, 757.0),
            weighted_degree: GenParam::new(5.58, 5.59, 0.0, 68.0),
            degree: GenParam::new(5.2, 4.89, 0.0, 57.0),
            h_index: GenParam::new(0.58, 0.58, 0.0, 8.0),
            growth_rate: GenParam::new(0.04, 0.09, 0.0, 0.4),
            tier_weights: [0.10, 0.45, 0.70],
            gender_match: 0.70,
            ethnicity_match: 0.50,
            country_match: 0.78,
            field_match: 0.85,
            home_field_mix: 0.85,
            collaborator_age_spread: 6,
            team_loyalty: 0.90,
            archetype_shift: 0.0,
        }
    }
}

impl Default for ClassGen {
    fn default() -> Self {
        ClassGen::non_rising()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub cohort_size: usize,
    pub rising_fraction: f64,
    pub first_pub_years: (i32, i32),
    pub feature_window_years: i32,
    pub label_window_years: i32,
    pub seed: u64,
    pub topic_fields: usize,
    /// Lognormal sigma of the per-author latent coupling count features.
    pub latent_strength: f64,
    pub rising: ClassGen,
    pub non_rising: ClassGen,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            cohort_size: 2000,
            rising_fraction: 0.05,
            first_pub_years: (2006, 2010),
            feature_window_years: 5,
            label_window_years: 10,
            seed: 42,
            topic_fields: 8,
            latent_strength: 0.5,
            rising: ClassGen::rising(),
            non_rising: ClassGen::non_rising(),
        }
    }
}

/// Files produced by the generator.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub corpus: PathBuf,
    pub sjr: PathBuf,
    pub truth: PathBuf,
    pub config: PathBuf,
}

/// One sidecar truth row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub author_id: String,
    pub label: u8,
    pub planted_growth_rate: f64,
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthRecord>, SynthError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| SynthError::Io {
        path: path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    })?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let rec: TruthRecord = row.map_err(|e| SynthError::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e),
        })?;
        out.push(rec);
    }
    Ok(out)
}

const COUNTRIES: [&str; 20] = [
    "US", "CN", "GB", "DE", "FR", "CA", "IT", "ES", "JP", "KR", "IN", "BR", "NL", "SE", "CH",
    "AU", "IR", "TR", "PL", "SG",
];

const ETHNICITIES: [Ethnicity; 13] = [
    Ethnicity::EastAsian,
    Ethnicity::Japanese,
    Ethnicity::IndianSubcontinent,
    Ethnicity::African,
    Ethnicity::Muslim,
    Ethnicity::British,
    Ethnicity::EastEuropean,
    Ethnicity::Jewish,
    Ethnicity::French,
    Ethnicity::Germanic,
    Ethnicity::Hispanic,
    Ethnicity::Italian,
    Ethnicity::Nordic,
];

const TERMS_PER_FIELD: usize = 40;

/// Three-letter alphabetic term, unique per (field, index). Three-letter
/// tokens survive preprocessing untouched (the stemmer's minimum-stem guard
/// never fires) and the 'q'/'z' middle letter avoids stop-list collisions.
fn field_term(field: usize, index: usize) -> String {
    let prefix = (b'a' + (field % 26) as u8) as char;
    let middle = if index < 26 { 'q' } else { 'z' };
    let last = (b'a' + (index % 26) as u8) as char;
    format!("{prefix}{middle}{last}")
}

/// Unbiased integer rounding: floor plus a Bernoulli on the fraction.
fn stochastic_round(x: f64, rng: &mut ChaCha20Rng) -> u64 {
    let floor = x.floor();
    let frac = x - floor;
    floor as u64 + u64::from(rng.gen::<f64>() < frac)
}

/// Lognormal multiplier with unit mean: exp(tau z - tau^2/2).
fn latent_multiplier(tau: f64, z: f64) -> f64 {
    (tau * z - tau * tau / 2.0).exp()
}

/// Draws a non-negative value with exact mean `p.mean` and total standard
/// deviation close to `p.sigma`, scaled by the author latent. The base
/// gamma variance is shrunk to absorb the latent's contribution; when that
/// is infeasible the latent is skipped for this draw.
fn gamma_with_latent(p: &GenParam, tau: f64, z: f64, rng: &mut ChaCha20Rng) -> f64 {
    if p.mean <= 0.0 {
        return 0.0;
    }
    if p.sigma <= 0.0 {
        return p.mean;
    }
    let inflation = (tau * tau).exp();
    let latent_var = p.mean * p.mean * (inflation - 1.0);
    let (base_var, multiplier) = if p.sigma * p.sigma > latent_var && tau > 0.0 {
        (
            (p.sigma * p.sigma - latent_var) / inflation,
            latent_multiplier(tau, z),
        )
    } else {
        (p.sigma * p.sigma, 1.0)
    };
    let scale = base_var / p.mean;
    let shape = p.mean / scale;
    let gamma = Gamma::new(shape, scale).expect("valid gamma");
    gamma.sample(rng) * multiplier
}

fn normal_clamped(p: &GenParam, rng: &mut ChaCha20Rng) -> f64 {
    if p.sigma <= 0.0 {
        return p.mean.clamp(p.min, p.max);
    }
    let normal = Normal::new(p.mean, p.sigma).expect("valid normal");
    normal.sample(rng).clamp(p.min, p.max)
}

fn poisson_count(lambda: f64, rng: &mut ChaCha20Rng) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("valid poisson").sample(rng) as u64
}

fn integer_sqrt(value: u64) -> u64 {
    (value as f64).sqrt().floor() as u64
}

struct VenueDirectory {
    table: SjrTable,
    /// year -> realized tier -> venue ids.
    buckets: BTreeMap<i32, BTreeMap<VenueTier, Vec<String>>>,
}

fn build_venues(study_period: (i32, i32), rng: &mut ChaCha20Rng) -> VenueDirectory {
    let mut table = SjrTable::new();
    for v in 0..50usize {
        let base = match v {
            0..=2 => 11.0 + 0.5 * v as f64,
            3..=8 => 5.2 + 0.17 * (v - 3) as f64,
            _ => 0.4 + 0.028 * (v - 9) as f64,
        };
        for year in study_period.0..=study_period.1 {
            let jitter = 1.0 + 0.02 * (rng.gen::<f64>() - 0.5);
            table.insert(format!("ven{v:02}"), year, base * jitter);
        }
    }
    let mut buckets = BTreeMap::new();
    for year in study_period.0..=study_period.1 {
        let tiers = tier_venues(&table, year).expect("50 venues per year");
        let mut by_tier: BTreeMap<VenueTier, Vec<String>> = BTreeMap::new();
        for (venue, tier) in tiers {
            by_tier.entry(tier).or_default().push(venue);
        }
        buckets.insert(year, by_tier);
    }
    VenueDirectory { table, buckets }
}

impl VenueDirectory {
    fn pick(&self, year: i32, weights: &[f64; 3], rng: &mut ChaCha20Rng) -> String {
        let total: f64 = weights.iter().sum();
        let mut target = rng.gen::<f64>() * total;
        let mut tier = VenueTier::C;
        for (t, &w) in [VenueTier::A, VenueTier::B, VenueTier::C].iter().zip(weights) {
            target -= w;
            if target <= 0.0 {
                tier = *t;
                break;
            }
        }
        let by_tier = &self.buckets[&year];
        let bucket = by_tier
            .get(&tier)
            .or_else(|| by_tier.get(&VenueTier::C))
            .expect("C bucket is never empty");
        bucket[rng.gen_range(0..bucket.len())].clone()
    }
}

struct AuthorFactory {
    rng_attrs: ChaCha20Rng,
}

impl AuthorFactory {
    fn random_attrs(&mut self) -> (Gender, Ethnicity, String) {
        let gender = match self.rng_attrs.gen::<f64>() {
            x if x < 0.35 => Gender::Female,
            x if x < 0.90 => Gender::Male,
            _ => Gender::Unknown,
        };
        let ethnicity = if self.rng_attrs.gen::<f64>() < 0.05 {
            Ethnicity::Unknown
        } else {
            ETHNICITIES[self.rng_attrs.gen_range(0..ETHNICITIES.len())]
        };
        let country = COUNTRIES[self.rng_attrs.gen_range(0..COUNTRIES.len())].to_string();
        (gender, ethnicity, country)
    }
}

fn paper_text(
    home_field: usize,
    mix: f64,
    fields: usize,
    rng: &mut ChaCha20Rng,
) -> (String, String) {
    let n_tokens = 26 + rng.gen_range(0..8);
    let tokens: Vec<String> = (0..n_tokens)
        .map(|_| {
            let field = if rng.gen::<f64>() < mix {
                home_field
            } else {
                rng.gen_range(0..fields)
            };
            field_term(field, rng.gen_range(0..TERMS_PER_FIELD))
        })
        .collect();
    (tokens[..4].join(" "), tokens[4..].join(" "))
}

/// Splits `total` citations over `n` papers so the h-index is exactly `h`:
/// papers 0..h get h each, tail papers stay below h, any remainder lands on
/// paper 0.
fn split_citations(total: u64, n: usize, h: u64) -> Vec<u32> {
    let mut out = vec![0u32; n];
    if h == 0 {
        debug_assert_eq!(total, 0);
        return out;
    }
    for slot in out.iter_mut().take(h as usize) {
        *slot = h as u32;
    }
    let mut remainder = total - h * h;
    for slot in out.iter_mut().take(n).skip(h as usize) {
        let take = remainder.min(h - 1);
        *slot = take as u32;
        remainder -= take;
    }
    out[0] += remainder as u32;
    out
}

/// Per-archetype collaboration knobs.
struct ArchetypeKnobs {
    gender_match: f64,
    ethnicity_match: f64,
    country_match: f64,
    field_match: f64,
    home_field_mix: f64,
    age_spread: u32,
}

/// Prolific authors collaborate homogeneously; their interdisciplinary
/// counterparts mix attributes and fields far more. shift = 0 returns the
/// class base knobs.
fn archetype_knobs(class: &ClassGen, shift: f64, prolific: bool) -> ArchetypeKnobs {
    let adjust = |p: f64| {
        if shift == 0.0 {
            p
        } else if prolific {
            (p + 0.6 * shift).min(0.97)
        } else {
            (p - 0.6 * shift).max(0.03)
        }
    };
    ArchetypeKnobs {
        gender_match: adjust(class.gender_match),
        ethnicity_match: adjust(class.ethnicity_match),
        country_match: adjust(class.country_match),
        field_match: adjust(class.field_match),
        home_field_mix: adjust(class.home_field_mix),
        age_spread: if shift > 0.0 && prolific {
            (class.collaborator_age_spread / 2).max(1)
        } else {
            class.collaborator_age_spread
        },
    }
}

/// Scales a gamma parameter's mean by the archetype factor and shrinks the
/// per-component sigma so the class-level spread stays near the target.
fn component_param(p: &GenParam, count_scale: f64, shift: f64) -> GenParam {
    let component_var =
        (p.sigma * p.sigma - p.mean * p.mean * shift * shift).max(0.0625 * p.sigma * p.sigma);
    GenParam {
        mean: p.mean * count_scale,
        sigma: component_var.sqrt(),
        min: p.min,
        max: p.max,
    }
}

/// Adapts the previous coauthor block to a new slot count, keeping entries
/// distinct; extra slots pull fresh members from the rotating pool.
fn resize_block(
    prev: &[usize],
    slots: usize,
    degree: usize,
    pool_offset: &mut usize,
) -> Vec<usize> {
    let mut block: Vec<usize> = prev.iter().copied().take(slots).collect();
    let mut guard = 0;
    while block.len() < slots.min(degree) && guard < 2 * degree {
        let candidate = *pool_offset % degree;
        *pool_offset = (*pool_offset + 1) % degree.max(1);
        if !block.contains(&candidate) {
            block.push(candidate);
        }
        guard += 1;
    }
    block
}

struct PlannedAuthor {
    author_id: String,
    rising: bool,
    planted_growth: f64,
}

/// Generates corpus.jsonl, sjr.csv, truth.csv, and a ready-to-run
/// config.json under `out_dir`.
pub fn synthesize_corpus(spec: &SynthSpec, out_dir: &Path) -> Result<SynthOutput, SynthError> {
    if spec.first_pub_years.0 > spec.first_pub_years.1 {
        return Err(SynthError::Infeasible("first_pub_years range is empty".into()));
    }
    if spec.cohort_size == 0 {
        return Err(SynthError::Infeasible("cohort_size must be positive".into()));
    }
    if !(0.0..1.0).contains(&spec.rising_fraction) {
        return Err(SynthError::Infeasible(
            "rising_fraction must be in [0, 1)".into(),
        ));
    }
    if spec.label_window_years <= spec.feature_window_years || spec.feature_window_years <= 0 {
        return Err(SynthError::Infeasible(
            "label window must exceed a positive feature window".into(),
        ));
    }
    if spec.topic_fields == 0 || spec.topic_fields > 26 {
        return Err(SynthError::Infeasible("topic_fields must be in 1..=26".into()));
    }
    std::fs::create_dir_all(out_dir).map_err(|source| SynthError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let study_period = (
        spec.first_pub_years.0 - 16,
        spec.first_pub_years.1 + spec.label_window_years - 1,
    );
    let venues = build_venues(study_period, &mut rng);
    let mut factory = AuthorFactory {
        rng_attrs: ChaCha20Rng::seed_from_u64(spec.seed.wrapping_add(1)),
    };

    // Class assignment: exactly round(fraction * n) rising authors, shuffled.
    let rising_count = (spec.rising_fraction * spec.cohort_size as f64).round() as usize;
    let mut is_rising = vec![false; spec.cohort_size];
    for flag in is_rising.iter_mut().take(rising_count) {
        *flag = true;
    }
    for i in (1..is_rising.len()).rev() {
        let j = rng.gen_range(0..=i);
        is_rising.swap(i, j);
    }

    let delta_t = spec.label_window_years - spec.feature_window_years;
    let mut records: Vec<PublicationRecord> = Vec::new();
    let mut planned: Vec<PlannedAuthor> = Vec::new();

    for (i, &rising) in is_rising.iter().enumerate() {
        let class = if rising { &spec.rising } else { &spec.non_rising };
        let author_id = format!("auth-{i:05}");
        let (gender, ethnicity, country) = factory.random_attrs();
        let home_field = rng.gen_range(0..spec.topic_fields);
        let first_year = rng.gen_range(spec.first_pub_years.0..=spec.first_pub_years.1);
        let latent_z: f64 = rng.sample(rand_distr::StandardNormal);
        let tau = spec.latent_strength;

        // Archetype split: count features scale by (1 +/- shift) with equal
        // probability and collaboration habits diverge, leaving class means
        // unchanged. shift = 0 keeps one homogeneous population.
        let shift = class.archetype_shift.clamp(0.0, 0.9);
        let prolific = shift > 0.0 && rng.gen::<f64>() < 0.5;
        let count_scale = if shift == 0.0 {
            1.0
        } else if prolific {
            1.0 + shift
        } else {
            1.0 - shift
        };
        let knobs = archetype_knobs(class, shift, prolific);

        // Feature-window quantities (exact class means by construction).
        let lambda =
            (class.articles.mean - 1.0).max(0.0) * count_scale * latent_multiplier(tau, latent_z);
        let articles = (1 + poisson_count(lambda, &mut rng)).min(class.articles.max as u64) as usize;
        let weighted = stochastic_round(
            gamma_with_latent(
                &component_param(&class.weighted_degree, count_scale, shift),
                tau,
                latent_z,
                &mut rng,
            ),
            &mut rng,
        )
        .clamp(1, class.weighted_degree.max.max(1.0) as u64) as usize;
        let citations = stochastic_round(
            gamma_with_latent(
                &component_param(&class.citations, count_scale, shift),
                tau,
                latent_z,
                &mut rng,
            ),
            &mut rng,
        )
        .min(class.citations.max as u64);

        // Distinct collaborators: every paper's coauthors must be distinct,
        // so degree is at least ceil(weighted/articles), and repeats require
        // degree <= weighted.
        let min_degree = weighted.div_ceil(articles).max(1);
        let degree = (normal_clamped(&class.degree, &mut rng).round() as i64)
            .clamp(min_degree as i64, weighted as i64) as usize;

        // Career trajectory, independent of the latent.
        let h1 = if citations == 0 {
            0
        } else {
            let draw = normal_clamped(&class.h_index, &mut rng).round() as i64;
            draw.clamp(1, (articles as u64).min(integer_sqrt(citations)) as i64) as u64
        };
        let growth = normal_clamped(&class.growth_rate, &mut rng);
        let delta_h = (growth * f64::from(delta_t)).round() as u64;
        let h2 = h1 + delta_h;

        // Collaborator pool with archetype-conditioned attribute mixing.
        // Debut papers are emitted later for the members actually used.
        let mut pool_refs = Vec::with_capacity(degree);
        let mut pool_fields = Vec::with_capacity(degree);
        let mut pool_debuts = Vec::with_capacity(degree);
        for j in 0..degree {
            let collab_id = format!("bg-{i:05}-{j:02}");
            let (mut g, mut e, mut c) = factory.random_attrs();
            if rng.gen::<f64>() < knobs.gender_match {
                g = gender;
            }
            if rng.gen::<f64>() < knobs.ethnicity_match {
                e = ethnicity;
            }
            if rng.gen::<f64>() < knobs.country_match {
                c = country.clone();
            }
            let collab_field = if rng.gen::<f64>() < knobs.field_match {
                home_field
            } else {
                rng.gen_range(0..spec.topic_fields)
            };
            let debut_year = spec.first_pub_years.0
                - 1
                - rng.gen_range(0..=knobs.age_spread) as i32;
            pool_refs.push(AuthorRef {
                author_id: collab_id,
                name: format!("Collaborator {i}-{j}"),
                gender: g,
                ethnicity: e,
                country: c,
            });
            pool_fields.push(collab_field);
            pool_debuts.push(debut_year);
        }
        let mut visited = vec![false; degree];

        let focal_ref = AuthorRef {
            author_id: author_id.clone(),
            name: format!("Author {i}"),
            gender,
            ethnicity,
            country: country.clone(),
        };

        // Window-1 papers: coauthor slots split evenly. A loyal paper reuses
        // the previous coauthor block; otherwise the pool rotates. Members of
        // one paper are always distinct, and total incidences equal the
        // planted weighted degree.
        let per_paper_citations = split_citations(citations, articles, h1);
        let base_slots = weighted / articles;
        let extra_slots = weighted % articles;
        let mut pool_offset = 0usize;
        let mut prev_block: Vec<usize> = Vec::new();
        let window_end = first_year + spec.feature_window_years - 1;
        for p in 0..articles {
            let year = if p == 0 {
                first_year
            } else {
                rng.gen_range(first_year..=window_end)
            };
            let slots = base_slots + usize::from(p < extra_slots);
            let block = if p > 0 && rng.gen::<f64>() < class.team_loyalty {
                resize_block(&prev_block, slots, degree, &mut pool_offset)
            } else {
                let b: Vec<usize> = (0..slots).map(|s| (pool_offset + s) % degree).collect();
                pool_offset = (pool_offset + slots) % degree.max(1);
                b
            };
            let mut authors = vec![focal_ref.clone()];
            for &member in &block {
                visited[member] = true;
                authors.push(pool_refs[member].clone());
            }
            prev_block = block;
            let (title, abstract_text) =
                paper_text(home_field, knobs.home_field_mix, spec.topic_fields, &mut rng);
            records.push(PublicationRecord {
                pub_id: format!("pub-{i:05}-w1-{p:02}"),
                year,
                title,
                abstract_text,
                venue_id: venues.pick(year, &class.tier_weights, &mut rng),
                citation_count: per_paper_citations[p],
                authors,
            });
        }

        // Window-2 papers push the label-window h-index to exactly h2.
        let already_at_h2 = per_paper_citations
            .iter()
            .filter(|&&c| u64::from(c) >= h2)
            .count() as u64;
        let needed = if delta_h > 0 {
            h2.saturating_sub(already_at_h2)
        } else {
            0
        };
        let extra_papers = poisson_count(0.3, &mut rng);
        let label_end = first_year + spec.label_window_years - 1;
        for p in 0..(needed + extra_papers) {
            let year = rng.gen_range(window_end + 1..=label_end);
            let citation_count = if p < needed {
                h2 as u32
            } else {
                (poisson_count(1.0, &mut rng)).min(h2.saturating_sub(1)) as u32
            };
            let mut authors = vec![focal_ref.clone()];
            if degree > 0 {
                let take = degree.min(1 + rng.gen_range(0..2));
                for s in 0..take {
                    let member = (pool_offset + s) % degree;
                    visited[member] = true;
                    authors.push(pool_refs[member].clone());
                }
                pool_offset = (pool_offset + take) % degree;
            }
            let (title, abstract_text) =
                paper_text(home_field, knobs.home_field_mix, spec.topic_fields, &mut rng);
            records.push(PublicationRecord {
                pub_id: format!("pub-{i:05}-w2-{p:02}"),
                year,
                title,
                abstract_text,
                venue_id: venues.pick(year, &spec.non_rising.tier_weights, &mut rng),
                citation_count,
                authors,
            });
        }

        // Every collaborator that appears on a focal paper needs a debut
        // before the cohort range, or they would enter the cohort themselves.
        for (j, seen) in visited.iter().enumerate() {
            if !seen {
                continue;
            }
            let (title, abstract_text) =
                paper_text(pool_fields[j], 0.9, spec.topic_fields, &mut rng);
            records.push(PublicationRecord {
                pub_id: format!("dbt-{i:05}-{j:02}"),
                year: pool_debuts[j],
                title,
                abstract_text,
                venue_id: venues.pick(pool_debuts[j], &[0.02, 0.08, 0.90], &mut rng),
                citation_count: poisson_count(1.5, &mut rng) as u32,
                authors: vec![pool_refs[j].clone()],
            });
        }

        planned.push(PlannedAuthor {
            author_id,
            rising,
            planted_growth: delta_h as f64 / f64::from(delta_t),
        });
    }

    // Outputs.
    let corpus_path = out_dir.join("corpus.jsonl");
    let io_err = |p: &Path, source: std::io::Error| SynthError::Io {
        path: p.display().to_string(),
        source,
    };
    let mut corpus_file =
        std::io::BufWriter::new(std::fs::File::create(&corpus_path).map_err(|e| io_err(&corpus_path, e))?);
    for record in &records {
        let line = serde_json::to_string(record).expect("record serializes");
        writeln!(corpus_file, "{line}").map_err(|e| io_err(&corpus_path, e))?;
    }
    corpus_file.flush().map_err(|e| io_err(&corpus_path, e))?;

    let sjr_path = out_dir.join("sjr.csv");
    venues.table.to_csv(&sjr_path).map_err(|e| SynthError::Io {
        path: sjr_path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    })?;

    let truth_path = out_dir.join("truth.csv");
    let mut truth_file = std::fs::File::create(&truth_path).map_err(|e| io_err(&truth_path, e))?;
    writeln!(truth_file, "author_id,label,planted_growth_rate")
        .map_err(|e| io_err(&truth_path, e))?;
    for author in &planned {
        writeln!(
            truth_file,
            "{},{},{}",
            author.author_id,
            u8::from(author.rising),
            author.planted_growth
        )
        .map_err(|e| io_err(&truth_path, e))?;
    }

    let config_path = out_dir.join("config.json");
    let mut config = PipelineConfig::default();
    config.inputs.corpus = PathBuf::from("corpus.jsonl");
    config.inputs.sjr = PathBuf::from("sjr.csv");
    config.study_period = study_period;
    config.cohort.first_pub_years = spec.first_pub_years;
    config.cohort.feature_window_years = spec.feature_window_years;
    config.cohort.label_window_years = spec.label_window_years;
    config.lda.topics = spec.topic_fields;
    config.output_dir = PathBuf::from("out");
    config.seed = spec.seed;
    config.save(&config_path).map_err(|e| SynthError::Io {
        path: config_path.display().to_string(),
        source: std::io::Error::new(std::io::ErrorKind::Other, e),
    })?;

    Ok(SynthOutput {
        corpus: corpus_path,
        sjr: sjr_path,
        truth: truth_path,
        config: config_path,
    })
}
