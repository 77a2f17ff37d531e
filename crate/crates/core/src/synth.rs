//! Synthetic labeled radar cubes: breathing, optionally walking person
//! blobs over static furniture, near-range leakage and Gaussian noise.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{save_cube, RadarCube, AZIMUTH_BINS, RANGE_BINS, SAMPLE_FRAMES};
use crate::dataset::{
    Activity, DatasetManifest, Environment, ManifestEntry, PeopleCount, Sample, Split, MAX_PEOPLE,
};
use crate::error::{Error, Result};

pub const DEFAULT_FRAME_RATE: f64 = 8.5;
pub const BREATHING_BAND: (f64, f64) = (0.2, 0.5);
pub const PERSON_RADIUS_RANGE: (f64, f64) = (1.0, 2.0);
const LEAKAGE_COL: f64 = 45.0;
const LEAKAGE_RADIUS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LayoutPreset {
    #[serde(rename = "A_empty")]
    AEmpty,
    #[serde(rename = "A_chairs")]
    AChairs,
    #[serde(rename = "A_desks")]
    ADesks,
    #[serde(rename = "A_whiteboard")]
    AWhiteboard,
    #[serde(rename = "B_complex")]
    BComplex,
}

impl LayoutPreset {
    pub const A_LAYOUTS: [LayoutPreset; 4] = [
        LayoutPreset::AEmpty,
        LayoutPreset::AChairs,
        LayoutPreset::ADesks,
        LayoutPreset::AWhiteboard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayoutPreset::AEmpty => "A_empty",
            LayoutPreset::AChairs => "A_chairs",
            LayoutPreset::ADesks => "A_desks",
            LayoutPreset::AWhiteboard => "A_whiteboard",
            LayoutPreset::BComplex => "B_complex",
        }
    }

    pub fn environment(self) -> Environment {
        match self {
            LayoutPreset::AEmpty => Environment::A1,
            LayoutPreset::AChairs => Environment::A2,
            LayoutPreset::ADesks => Environment::A3,
            LayoutPreset::AWhiteboard => Environment::A4,
            LayoutPreset::BComplex => Environment::B,
        }
    }

    /// Static reflectors of the layout. Chair count and placement in
    /// `A_chairs` are drawn from `rng`; every other layout is fixed.
    pub fn furniture(self, rng: &mut impl Rng) -> Vec<StaticBlob> {
        let chair = |row, col| StaticBlob { row, col, radius: 1.5, amplitude: 0.45 };
        let desk = |row, col| StaticBlob { row, col, radius: 2.5, amplitude: 0.7 };
        let board = |row, col| StaticBlob { row, col, radius: 2.0, amplitude: 0.85 };
        match self {
            LayoutPreset::AEmpty => Vec::new(),
            LayoutPreset::AChairs => {
                let n = rng.random_range(1..=4);
                (0..n)
                    .map(|_| chair(rng.random_range(3.0..10.0), rng.random_range(8.0..83.0)))
                    .collect()
            }
            LayoutPreset::ADesks => vec![desk(6.0, 41.0), desk(6.0, 49.0)],
            LayoutPreset::AWhiteboard => vec![board(10.0, 20.0), board(10.0, 24.0)],
            LayoutPreset::BComplex => vec![
                chair(4.0, 15.0),
                chair(8.0, 70.0),
                chair(5.0, 82.0),
                desk(6.0, 36.0),
                desk(7.0, 55.0),
                board(10.0, 27.0),
            ],
        }
    }
}

impl fmt::Display for LayoutPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayoutPreset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A_empty" => Ok(LayoutPreset::AEmpty),
            "A_chairs" => Ok(LayoutPreset::AChairs),
            "A_desks" => Ok(LayoutPreset::ADesks),
            "A_whiteboard" => Ok(LayoutPreset::AWhiteboard),
            "B_complex" => Ok(LayoutPreset::BComplex),
            other => Err(Error::InvalidInput(format!("unknown layout preset {other:?}"))),
        }
    }
}

/// Temporally constant Gaussian reflector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticBlob {
    pub row: f64,
    pub col: f64,
    pub radius: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motion {
    Stationary,
    RandomWalk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonSpec {
    pub row: f64,
    pub col: f64,
    /// Truncation radius in pixels; the Gaussian profile has sigma = radius / 2.
    pub radius: f64,
    pub amplitude: f64,
    pub breathing_hz: f64,
    pub phase: f64,
    pub motion: Motion,
    /// Per-axis step std of the random walk, cells per frame.
    pub step_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub persons: Vec<PersonSpec>,
    pub furniture: Vec<StaticBlob>,
    pub layout_preset: LayoutPreset,
    pub frame_rate: f64,
    pub frames: usize,
    pub noise_std: f64,
    /// Constant offset added to every pixel.
    pub noise_floor: f64,
    /// Peak of the static transmitter leakage spot at zero range, boresight.
    pub leakage: f64,
    /// Breathing modulation depth m.
    pub modulation_depth: f64,
    pub seed: u64,
}

impl SceneConfig {
    /// Empty noiseless scene on the default grid.
    pub fn empty(layout_preset: LayoutPreset, seed: u64) -> Self {
        Self {
            persons: Vec::new(),
            furniture: Vec::new(),
            layout_preset,
            frame_rate: DEFAULT_FRAME_RATE,
            frames: SAMPLE_FRAMES,
            noise_std: 0.0,
            noise_floor: 0.0,
            leakage: 0.0,
            modulation_depth: 0.3,
            seed,
        }
    }

    pub fn label(&self) -> Result<PeopleCount> {
        PeopleCount::new(self.persons.len().min(255) as u8)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.persons.len() > usize::from(MAX_PEOPLE) {
            return bad(format!("{} persons exceeds {MAX_PEOPLE}", self.persons.len()));
        }
        if self.frames < 2 {
            return bad(format!("frames must be >= 2, got {}", self.frames));
        }
        for (name, v) in [
            ("noise_std", self.noise_std),
            ("noise_floor", self.noise_floor),
            ("leakage", self.leakage),
            ("modulation_depth", self.modulation_depth),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return bad(format!("frame_rate must be > 0, got {}", self.frame_rate));
        }
        let inside = |r: f64, c: f64| {
            (0.0..=(RANGE_BINS - 1) as f64).contains(&r) && (0.0..=(AZIMUTH_BINS - 1) as f64).contains(&c)
        };
        for (i, p) in self.persons.iter().enumerate() {
            if !inside(p.row, p.col) {
                return Err(Error::InvalidInput(format!(
                    "person {i} at ({}, {}) is outside the grid",
                    p.row, p.col
                )));
            }
            if !(BREATHING_BAND.0..=BREATHING_BAND.1).contains(&p.breathing_hz) {
                return bad(format!("person {i} breathing {} Hz outside band", p.breathing_hz));
            }
            if !(PERSON_RADIUS_RANGE.0..=PERSON_RADIUS_RANGE.1).contains(&p.radius) {
                return bad(format!("person {i} radius {} outside 1..=2 px", p.radius));
            }
            if !(p.amplitude >= 0.0 && p.step_std >= 0.0 && p.phase.is_finite()) {
                return bad(format!("person {i} has a negative amplitude or step"));
            }
        }
        for (i, b) in self.furniture.iter().enumerate() {
            if !inside(b.row, b.col) {
                return Err(Error::InvalidInput(format!(
                    "furniture {i} at ({}, {}) is outside the grid",
                    b.row, b.col
                )));
            }
            if !(b.radius > 0.0 && b.amplitude >= 0.0) {
                return bad(format!("furniture {i} needs radius > 0 and amplitude >= 0"));
            }
        }
        Ok(())
    }
}

fn reflect(mut x: f64, hi: f64) -> f64 {
    if hi <= 0.0 {
        return 0.0;
    }
    let period = 2.0 * hi;
    x = x.rem_euclid(period);
    if x > hi {
        period - x
    } else {
        x
    }
}

/// Per-frame (row, col) centers of every person.
pub fn person_tracks(scene: &SceneConfig) -> Vec<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    rng.set_stream(1);
    let (hr, hc) = ((RANGE_BINS - 1) as f64, (AZIMUTH_BINS - 1) as f64);
    scene
        .persons
        .iter()
        .map(|p| {
            let mut pos = (p.row, p.col);
            let step = Normal::new(0.0, p.step_std.max(0.0)).expect("finite std");
            (0..scene.frames)
                .map(|t| {
                    if t > 0 && p.motion == Motion::RandomWalk {
                        pos.0 = reflect(pos.0 + step.sample(&mut rng), hr);
                        pos.1 = reflect(pos.1 + step.sample(&mut rng), hc);
                    }
                    pos
                })
                .collect()
        })
        .collect()
}

fn add_blob(plane: &mut [f64], row: f64, col: f64, radius: f64, amplitude: f64) {
    let sigma = radius / 2.0;
    let r0 = (row - radius).floor().max(0.0) as usize;
    let r1 = ((row + radius).ceil() as usize).min(RANGE_BINS - 1);
    let c0 = (col - radius).floor().max(0.0) as usize;
    let c1 = ((col + radius).ceil() as usize).min(AZIMUTH_BINS - 1);
    for r in r0..=r1 {
        for c in c0..=c1 {
            let d2 = (r as f64 - row).powi(2) + (c as f64 - col).powi(2);
            if d2 <= radius * radius {
                plane[r * AZIMUTH_BINS + c] += amplitude * (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }
}

/// Renders a scene on the 12 x 91 grid. Values are clamped at 0.
pub fn generate_cube(scene: &SceneConfig) -> Result<RadarCube> {
    scene.validate()?;
    let plane_len = RANGE_BINS * AZIMUTH_BINS;
    let mut background = vec![scene.noise_floor; plane_len];
    if scene.leakage > 0.0 {
        add_blob(&mut background, 0.0, LEAKAGE_COL, LEAKAGE_RADIUS, scene.leakage);
    }
    for b in &scene.furniture {
        add_blob(&mut background, b.row, b.col, b.radius, b.amplitude);
    }
    let tracks = person_tracks(scene);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(scene.seed);
    noise_rng.set_stream(2);
    let noise = Normal::new(0.0, scene.noise_std).expect("finite noise std");
    let mut data = Vec::with_capacity(plane_len * scene.frames);
    let mut plane = vec![0.0; plane_len];
    for t in 0..scene.frames {
        plane.copy_from_slice(&background);
        for (p, track) in scene.persons.iter().zip(&tracks) {
            let phase = 2.0 * PI * p.breathing_hz * t as f64 / scene.frame_rate + p.phase;
            let amp = p.amplitude * (1.0 + scene.modulation_depth * phase.sin());
            let (r, c) = track[t];
            add_blob(&mut plane, r, c, p.radius, amp);
        }
        for v in &plane {
            let n = if scene.noise_std > 0.0 {
                noise.sample(&mut noise_rng)
            } else {
                0.0
            };
            data.push((v + n).max(0.0) as f32);
        }
    }
    RadarCube::new(RANGE_BINS, AZIMUTH_BINS, scene.frames, data)
}

pub fn generate_sample(scene: &SceneConfig, id: impl Into<String>, activity: Activity) -> Result<Sample> {
    Ok(Sample {
        id: id.into(),
        cube: generate_cube(scene)?,
        label: scene.label()?,
        environment: scene.layout_preset.environment(),
        activity,
    })
}

/// Dataset-level knobs of the random scene sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub frames: usize,
    pub frame_rate: f64,
    pub noise_std: f64,
    pub noise_floor: f64,
    pub leakage: f64,
    pub modulation_depth: f64,
    pub step_std: f64,
    pub person_amplitude: (f64, f64),
    pub person_radius: (f64, f64),
    /// Minimum distance between person start positions, pixels.
    pub min_separation: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            frames: SAMPLE_FRAMES,
            frame_rate: DEFAULT_FRAME_RATE,
            noise_std: 0.01,
            noise_floor: 0.02,
            leakage: 1.2,
            modulation_depth: 0.3,
            step_std: 0.3,
            person_amplitude: (0.75, 0.85),
            person_radius: (1.9, 2.0),
            min_separation: 14.0,
        }
    }
}

/// Seed of one sample, independent of generation order.
pub fn derive_seed(master: u64, id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(master ^ splitmix64(h))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Draws a scene with `count` persons for one layout and activity.
pub fn random_scene(
    preset: LayoutPreset,
    count: PeopleCount,
    activity: Activity,
    params: &SynthParams,
    seed: u64,
) -> Result<SceneConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let furniture = preset.furniture(&mut rng);
    let n = count.index();
    let mut starts: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut attempts = 0;
    while starts.len() < n {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::InvalidConfig(format!(
                "cannot place {n} persons {} px apart",
                params.min_separation
            )));
        }
        let cand = (rng.random_range(2.5..8.5), rng.random_range(6.0..84.0));
        let far = starts.iter().all(|s: &(f64, f64)| {
            ((s.0 - cand.0).powi(2) + (s.1 - cand.1).powi(2)).sqrt() >= params.min_separation
        });
        if far {
            starts.push(cand);
        }
    }
    let persons = starts
        .into_iter()
        .enumerate()
        .map(|(i, (row, col))| {
            let walks = match activity {
                Activity::Standing => false,
                Activity::Walking => true,
                Activity::Mixed => i % 2 == 0,
            };
            PersonSpec {
                row,
                col,
                radius: rng.random_range(params.person_radius.0..=params.person_radius.1),
                amplitude: rng.random_range(params.person_amplitude.0..=params.person_amplitude.1),
                breathing_hz: rng.random_range(BREATHING_BAND.0..=BREATHING_BAND.1),
                phase: rng.random_range(0.0..2.0 * PI),
                motion: if walks { Motion::RandomWalk } else { Motion::Stationary },
                step_std: if walks { params.step_std } else { 0.0 },
            }
        })
        .collect();
    Ok(SceneConfig {
        persons,
        furniture,
        layout_preset: preset,
        frame_rate: params.frame_rate,
        frames: params.frames,
        noise_std: params.noise_std,
        noise_floor: params.noise_floor,
        leakage: params.leakage,
        modulation_depth: params.modulation_depth,
        seed: rng.random(),
    })
}

/// Largest-remainder split of `n` into 70 / 15 / 15 percent.
pub fn split_sizes(n: usize) -> [usize; 3] {
    let shares = [70usize, 15, 15];
    let mut sizes = shares.map(|s| n * s / 100);
    let mut rem: Vec<(usize, usize)> = shares.iter().enumerate().map(|(i, s)| (n * s % 100, i)).collect();
    // larger remainder first; ties keep train, val, test order
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let missing = n - sizes.iter().sum::<usize>();
    for &(_, i) in rem.iter().take(missing) {
        sizes[i] += 1;
    }
    sizes
}

/// One generated sample together with its scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub id: String,
    pub activity: Activity,
    pub split: Split,
    pub scene: SceneConfig,
}

/// Scenes of a dataset: `per_class` samples per label, layouts and
/// activities cycled. A layouts split 70/15/15; B samples are test only.
pub fn plan_dataset(
    presets: &[LayoutPreset],
    per_class: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<Vec<SceneRecord>> {
    if presets.is_empty() {
        return Err(Error::InvalidConfig("no layout preset given".into()));
    }
    let mut records = Vec::with_capacity(per_class * 4);
    for label in PeopleCount::all() {
        for i in 0..per_class {
            let preset = presets[i % presets.len()];
            let activity = Activity::ALL[i % Activity::ALL.len()];
            let id = format!("{}-c{}-{:04}", preset.as_str(), label, i);
            let scene = random_scene(preset, label, activity, params, derive_seed(seed, &id))?;
            records.push(SceneRecord {
                id,
                activity,
                split: Split::Test,
                scene,
            });
        }
    }
    let mut a_idx: Vec<usize> = (0..records.len())
        .filter(|&i| records[i].scene.layout_preset.environment().is_a())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x5eed));
    a_idx.shuffle(&mut rng);
    let [train, val, _] = split_sizes(a_idx.len());
    for (k, &i) in a_idx.iter().enumerate() {
        records[i].split = if k < train {
            Split::Train
        } else if k < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
    Ok(records)
}

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const SCENES_FILE: &str = "scenes.json";

/// Writes `<id>.radc` files, `manifest.jsonl` and `scenes.json` into `out_dir`.
pub fn generate_dataset(
    presets: &[LayoutPreset],
    per_class: usize,
    seed: u64,
    params: &SynthParams,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let records = plan_dataset(presets, per_class, seed, params)?;
    records.par_iter().try_for_each(|rec| {
        let cube = generate_cube(&rec.scene)?;
        save_cube(&cube, out_dir.join(format!("{}.radc", rec.id)))
    })?;
    let entries = records
        .iter()
        .map(|rec| {
            Ok(ManifestEntry {
                path: format!("{}.radc", rec.id),
                label: rec.scene.label()?,
                environment: rec.scene.layout_preset.environment(),
                activity: rec.activity,
                split: rec.split,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest::new(entries, out_dir)?;
    manifest.save(out_dir.join(MANIFEST_FILE))?;
    let echo = serde_json::json!({ "seed": seed, "per_class": per_class, "params": params, "samples": records });
    let p = out_dir.join(SCENES_FILE);
    let s = serde_json::to_string_pretty(&echo).map_err(|e| Error::json("scene echo", e))?;
    fs::write(&p, s).map_err(|e| Error::io(&p, e))?;
    Ok(manifest)
}

/// In-memory variant of [`generate_dataset`].
pub fn generate_samples(
    presets: &[LayoutPreset],
    per_class: usize,
    seed: u64,
    params: &SynthParams,
) -> Result<Vec<(Sample, Split)>> {
    plan_dataset(presets, per_class, seed, params)?
        .par_iter()
        .map(|rec| Ok((generate_sample(&rec.scene, rec.id.clone(), rec.activity)?, rec.split)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::temporal_std_map;

    fn person(row: f64, col: f64, motion: Motion) -> PersonSpec {
        PersonSpec {
            row,
            col,
            radius: 2.0,
            amplitude: 0.6,
            breathing_hz: 0.3,
            phase: 0.4,
            motion,
            step_std: if motion == Motion::RandomWalk { 0.3 } else { 0.0 },
        }
    }

    #[test]
    fn empty_noiseless_scene_is_zero() {
        let s = generate_sample(&SceneConfig::empty(LayoutPreset::AEmpty, 1), "x", Activity::Standing).unwrap();
        assert!(s.cube.data().iter().all(|&v| v == 0.0));
        assert_eq!(s.label.get(), 0);
    }

    #[test]
    fn stationary_person_support() {
        let mut sc = SceneConfig::empty(LayoutPreset::AChairs, 2);
        sc.persons.push(person(5.0, 30.0, Motion::Stationary));
        sc.furniture.push(StaticBlob { row: 5.0, col: 60.0, radius: 2.0, amplitude: 0.8 });
        let std = temporal_std_map(&generate_cube(&sc).unwrap()).unwrap();
        for r in 0..RANGE_BINS {
            for c in 0..AZIMUTH_BINS {
                let inside = (r as f64 - 5.0).powi(2) + (c as f64 - 30.0).powi(2) <= 4.0;
                assert_eq!(std.get(r, c) > 0.0, inside, "({r}, {c})");
            }
        }
    }

    #[test]
    fn walking_support_is_track_union() {
        let mut sc = SceneConfig::empty(LayoutPreset::AEmpty, 3);
        sc.persons.push(person(6.0, 20.0, Motion::RandomWalk));
        sc.persons.push(person(4.0, 60.0, Motion::Stationary));
        let std = temporal_std_map(&generate_cube(&sc).unwrap()).unwrap();
        let tracks = person_tracks(&sc);
        for r in 0..RANGE_BINS {
            for c in 0..AZIMUTH_BINS {
                let covered = sc.persons.iter().zip(&tracks).any(|(p, tr)| {
                    tr.iter()
                        .any(|&(pr, pc)| (r as f64 - pr).powi(2) + (c as f64 - pc).powi(2) <= p.radius * p.radius)
                });
                assert_eq!(std.get(r, c) > 0.0, covered, "({r}, {c})");
            }
        }
    }

    #[test]
    fn person_std_exceeds_furniture_std() {
        let params = SynthParams::default();
        for seed in 0..100u64 {
            let sc = random_scene(
                LayoutPreset::BComplex,
                PeopleCount::new(1 + (seed % 3) as u8).unwrap(),
                Activity::ALL[(seed % 3) as usize],
                &params,
                seed,
            )
            .unwrap();
            let std = temporal_std_map(&generate_cube(&sc).unwrap()).unwrap();
            let near = |r: usize, c: usize, row: f64, col: f64, rad: f64| {
                (r as f64 - row).powi(2) + (c as f64 - col).powi(2) <= rad * rad
            };
            let (mut ps, mut pn, mut fs, mut fnn) = (0.0, 0, 0.0, 0);
            for r in 0..RANGE_BINS {
                for c in 0..AZIMUTH_BINS {
                    if sc.persons.iter().any(|p| near(r, c, p.row, p.col, p.radius)) {
                        ps += std.get(r, c);
                        pn += 1;
                    } else if sc.furniture.iter().any(|b| near(r, c, b.row, b.col, b.radius)) {
                        fs += std.get(r, c);
                        fnn += 1;
                    }
                }
            }
            assert!(ps / pn as f64 > fs / fnn as f64, "seed {seed}");
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let p = SynthParams::default();
        let sc = random_scene(LayoutPreset::AChairs, PeopleCount::new(2).unwrap(), Activity::Mixed, &p, 11).unwrap();
        let a = generate_cube(&sc).unwrap().to_radc_bytes().unwrap();
        let b = generate_cube(&sc).unwrap().to_radc_bytes().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_rounding() {
        assert_eq!(split_sizes(32), [22, 5, 5]);
        assert_eq!(split_sizes(100), [70, 15, 15]);
        assert_eq!(split_sizes(0), [0, 0, 0]);
        assert_eq!(split_sizes(1), [1, 0, 0]);
    }

    #[test]
    fn dataset_plan() {
        let p = SynthParams::default();
        let recs = plan_dataset(&[LayoutPreset::AChairs], 8, 5, &p).unwrap();
        assert_eq!(recs.len(), 32);
        let count = |s| recs.iter().filter(|r| r.split == s).count();
        assert_eq!((count(Split::Train), count(Split::Val), count(Split::Test)), (22, 5, 5));
        for l in 0..4u8 {
            assert_eq!(recs.iter().filter(|r| r.scene.persons.len() == l as usize).count(), 8);
        }
        assert!(plan_dataset(&[LayoutPreset::AChairs], 0, 5, &p).unwrap().is_empty());
        let b = plan_dataset(&[LayoutPreset::BComplex], 3, 5, &p).unwrap();
        assert!(b.iter().all(|r| r.split == Split::Test));
    }

    #[test]
    fn invalid_scenes() {
        let mut sc = SceneConfig::empty(LayoutPreset::AEmpty, 0);
        sc.persons.push(person(20.0, 5.0, Motion::Stationary));
        assert!(generate_cube(&sc).is_err());
        let mut sc = SceneConfig::empty(LayoutPreset::AEmpty, 0);
        sc.frames = 1;
        assert!(generate_cube(&sc).is_err());
    }

    #[test]
    fn reflection() {
        assert_eq!(reflect(-1.0, 10.0), 1.0);
        assert_eq!(reflect(12.0, 10.0), 8.0);
        assert_eq!(reflect(5.0, 10.0), 5.0);
    }
}
