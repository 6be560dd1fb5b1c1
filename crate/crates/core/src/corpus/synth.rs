use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::RequirementRecord;
use crate::seed::{stream_rng, StreamRng, STREAM_SYNTH};
use crate::{Error, Result};

/// Parameters of the synthetic requirement corpus.
///
/// Records are seated in three roles following `class_mix`, ordered
/// (INDEPENDENT, REQUIRES, OTHER): unlinked singletons, `depends_on` pairs
/// and `see_also` pairs. Each role draws its topic words from its own
/// disjoint pool; `signal_strength` is the probability that a title word
/// comes from the record's topic rather than the shared background pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_records: usize,
    pub signal_strength: f64,
    pub class_mix: [f64; 3],
    pub seed: u64,
    /// Size of each role's topic-word pool.
    pub vocab_per_class: usize,
    /// Words per topic.
    pub topic_size: usize,
    pub min_title_words: usize,
    pub max_title_words: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_records: 3000,
            signal_strength: 0.9,
            class_mix: [0.5, 0.35, 0.15],
            seed: 1,
            vocab_per_class: 60,
            topic_size: 6,
            min_title_words: 4,
            max_title_words: 9,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_records < 6 {
            return Err(Error::InvalidArgument(format!(
                "n_records must be at least 6 to seat all classes, got {}",
                self.n_records
            )));
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return Err(Error::InvalidArgument(
                "signal_strength must lie in [0, 1]".into(),
            ));
        }
        if self.class_mix.iter().any(|p| !p.is_finite() || *p < 0.0)
            || (self.class_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidArgument(
                "class_mix must be nonnegative proportions summing to 1".into(),
            ));
        }
        if self.topic_size == 0 || self.vocab_per_class < self.topic_size {
            return Err(Error::InvalidArgument(
                "vocab_per_class must be at least topic_size > 0".into(),
            ));
        }
        if self.min_title_words == 0 || self.max_title_words < self.min_title_words {
            return Err(Error::InvalidArgument("invalid title length range".into()));
        }
        Ok(())
    }
}

const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
const VOWELS: &[u8] = b"aeiou";

/// Deterministic three-syllable pseudo-word; distinct for distinct `k`
/// below 13^3 * 5^3.
fn pseudo_word(k: usize) -> String {
    let space = 13usize.pow(3) * 5usize.pow(3);
    let mut code = (k * 7919 + 104_729) % space;
    let mut out = String::with_capacity(6);
    for _ in 0..3 {
        let c = code % 13;
        code /= 13;
        let v = code % 5;
        code /= 5;
        out.push(CONSONANTS[c] as char);
        out.push(VOWELS[v] as char);
    }
    out
}

const BACKGROUND: &[&str] = &[
    "add",
    "allow",
    "support",
    "option",
    "page",
    "tab",
    "window",
    "menu",
    "user",
    "setting",
    "browser",
    "bookmark",
    "search",
    "toolbar",
    "dialog",
    "button",
    "display",
    "file",
    "history",
    "panel",
    "sync",
    "update",
    "default",
    "profile",
    "content",
    "view",
    "link",
    "list",
    "mode",
    "feature",
    "improve",
    "enable",
    "show",
    "new",
    "keyboard",
    "shortcut",
    "preference",
    "url",
    "address",
    "bar",
    "icon",
    "theme",
    "download",
    "manager",
    "session",
    "private",
    "site",
    "text",
    "field",
    "context",
    "item",
    "custom",
    "open",
    "close",
    "restore",
];

const FILLERS: &[&str] = &[
    "the", "a", "to", "in", "for", "on", "with", "should", "be", "of", "and",
];
const PRIORITIES: &[&str] = &["P1", "P2", "P3", "P4", "P5", "--"];

#[derive(Clone, Copy, PartialEq)]
enum Role {
    Single,
    Requires,
    Other,
}

struct Topics {
    pools: [Vec<Vec<String>>; 3],
}

impl Topics {
    fn new(cfg: &SynthConfig) -> Self {
        let per_topic = cfg.topic_size;
        let n_topics = cfg.vocab_per_class / per_topic;
        let pool = |family: usize| -> Vec<Vec<String>> {
            (0..n_topics)
                .map(|t| {
                    (0..per_topic)
                        .map(|w| pseudo_word(family * cfg.vocab_per_class + t * per_topic + w))
                        .collect()
                })
                .collect()
        };
        Topics {
            pools: [pool(0), pool(1), pool(2)],
        }
    }

    fn pick(&self, role: Role, rng: &mut StreamRng) -> &[String] {
        let family = match role {
            Role::Single => 0,
            Role::Requires => 1,
            Role::Other => 2,
        };
        self.pools[family].choose(rng).expect("nonempty topic pool")
    }
}

fn title(cfg: &SynthConfig, topic: &[String], anchored: bool, rng: &mut StreamRng) -> String {
    let len = rng.gen_range(cfg.min_title_words..=cfg.max_title_words);
    let mut words: Vec<&str> = Vec::with_capacity(len * 2);
    for i in 0..len {
        let word = if i == 0 && anchored && rng.gen_bool(cfg.signal_strength) {
            topic[0].as_str()
        } else if rng.gen_bool(cfg.signal_strength) {
            topic.choose(rng).expect("nonempty topic").as_str()
        } else {
            BACKGROUND.choose(rng).expect("nonempty background")
        };
        words.push(word);
        if i + 1 < len && rng.gen_bool(0.25) {
            words.push(FILLERS.choose(rng).expect("nonempty fillers"));
        }
    }
    let mut text = words.join(" ");
    if let Some(first) = text.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    text
}

/// Generates a deterministic corpus whose pair labels are recoverable from
/// the link fields.
pub fn synth_corpus(config: &SynthConfig) -> Result<Vec<RequirementRecord>> {
    config.validate()?;
    let n = config.n_records;
    let mut rng = stream_rng(config.seed, STREAM_SYNTH);

    let seats = apportion_records(n, &config.class_mix);
    let mut roles: Vec<Role> = Vec::with_capacity(n);
    roles.extend(std::iter::repeat(Role::Requires).take(seats[1]));
    roles.extend(std::iter::repeat(Role::Other).take(seats[2]));
    roles.extend(std::iter::repeat(Role::Single).take(seats[0]));

    // Clusters: linked roles come in consecutive pairs, singles alone.
    let mut clusters: Vec<(Role, Vec<usize>)> = Vec::new();
    let mut i = 0;
    while i < n {
        let role = roles[i];
        if role == Role::Single {
            clusters.push((role, vec![i]));
            i += 1;
        } else {
            clusters.push((role, vec![i, i + 1]));
            i += 2;
        }
    }

    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(&mut rng);
    let id_of = |slot: usize| format!("R{:05}", slot + 1);

    let topics = Topics::new(config);
    let mut records: Vec<Option<RequirementRecord>> = vec![None; n];
    for (role, members) in &clusters {
        let topic = topics.pick(*role, &mut rng);
        let anchored = *role != Role::Single;
        let ids: Vec<String> = members.iter().map(|&m| id_of(slots[m])).collect();
        for (k, &m) in members.iter().enumerate() {
            let mut rec =
                RequirementRecord::new(ids[k].clone(), title(config, topic, anchored, &mut rng));
            rec.product = "Firefox".into();
            rec.priority = PRIORITIES.choose(&mut rng).expect("nonempty").to_string();
            rec.issue_type = "enhancement".into();
            if k == 0 && members.len() == 2 {
                match role {
                    Role::Requires => rec.depends_on.push(ids[1].clone()),
                    Role::Other => rec.see_also.push(ids[1].clone()),
                    Role::Single => {}
                }
            }
            records[slots[m]] = Some(rec);
        }
    }
    Ok(records
        .into_iter()
        .map(|r| r.expect("every slot filled"))
        .collect())
}

/// Record counts per role (INDEPENDENT, REQUIRES, OTHER). Linked roles get
/// an even count, at least one pair when their proportion is positive.
fn apportion_records(n: usize, mix: &[f64; 3]) -> [usize; 3] {
    let pair_count = |p: f64| -> usize {
        let pairs = (n as f64 * p / 2.0).round() as usize;
        if p > 0.0 {
            pairs.max(1)
        } else {
            0
        }
    };
    let mut requires = pair_count(mix[1]);
    let mut other = pair_count(mix[2]);
    while 2 * (requires + other) > n {
        if requires >= other && requires > 1 {
            requires -= 1;
        } else if other > 1 {
            other -= 1;
        } else {
            break;
        }
    }
    [n - 2 * (requires + other), 2 * requires, 2 * other]
}
