//! Reproducible synthetic multi-domain corpora.
//!
//! Every domain owns an exclusive keyword list; all domains share one list of
//! function words drawn with Zipf-like weights. A pair picks a topic keyword,
//! fills its context and response from a small keyword window around the topic
//! plus function words, so responses are predictable from contexts and domains
//! are separable by vocabulary alone.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ContextResponsePair;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    pub keywords: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub domains: Vec<DomainSpec>,
    pub function_words: Vec<String>,
    pub pairs_per_domain: usize,
    /// Fraction of each response (and context) made of domain keywords.
    pub keyword_ratio: f64,
    /// Inclusive token-length ranges.
    pub context_len: (usize, usize),
    pub response_len: (usize, usize),
    /// Number of consecutive keywords, starting at the topic, a pair draws from.
    pub topic_window: usize,
    pub seed: u64,
}

const THEMES: [(&str, &str); 5] = [
    (
        "tech",
        "ubuntu install kernel upgrade laptop driver terminal package file windows boot partition \
         server sudo update network wifi disk grub repository compile version desktop firmware",
    ),
    (
        "persona",
        "hiking music teacher travel hobby dog cooking garden guitar painting beach family pizza \
         yoga camping books concert farm swimming coffee vegan cats dancing nurse",
    ),
    (
        "movies",
        "captain murder detective gun ship sir police money kill night door car father mother king \
         war blood secret prison castle doctor army lady boss",
    ),
    (
        "social",
        "lol game tonight follow tweet team season vote news election fans stream video phone \
         selfie birthday party weekend friday playoff trending hashtag retweet meme",
    ),
    (
        "science",
        "atom energy planet orbit molecule telescope galaxy physics chemistry cell gene protein \
         fossil climate volcano laser quantum neutron theory experiment lab data sample research",
    ),
];

const FUNCTION_WORDS: &str = "i you the a to it is and that my do what in have of for so with \
                              was me not are this on just but we be like can";

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

impl SyntheticSpec {
    /// `num_domains` domains drawn from the built-in themes (falling back to
    /// generated keywords past the fifth), with desk-scale defaults.
    pub fn standard(num_domains: usize, pairs_per_domain: usize, seed: u64) -> Self {
        let domains = (0..num_domains)
            .map(|d| match THEMES.get(d) {
                Some((name, kw)) => DomainSpec {
                    name: name.to_string(),
                    keywords: words(kw),
                },
                None => DomainSpec {
                    name: format!("domain{d}"),
                    keywords: (0..24).map(|i| format!("d{d}w{i}")).collect(),
                },
            })
            .collect();
        Self {
            domains,
            function_words: words(FUNCTION_WORDS),
            pairs_per_domain,
            keyword_ratio: 0.5,
            context_len: (4, 8),
            response_len: (4, 8),
            topic_window: 3,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(m));
        if self.domains.is_empty() {
            return err("at least one domain is required".into());
        }
        if self.pairs_per_domain == 0 {
            return err("pair count must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.keyword_ratio) {
            return err(format!("keyword ratio {} outside [0, 1]", self.keyword_ratio));
        }
        if self.context_len.0 == 0
            || self.response_len.0 == 0
            || self.context_len.0 > self.context_len.1
            || self.response_len.0 > self.response_len.1
        {
            return err("length ranges must be non-empty and start at 1 or more".into());
        }
        if self.topic_window == 0 {
            return err("topic window must be at least 1".into());
        }
        if self.keyword_ratio < 1.0 && self.function_words.is_empty() {
            return err("function words are required when keyword ratio < 1".into());
        }
        let mut owner: std::collections::HashMap<&str, &str> = Default::default();
        let shared: HashSet<&str> = self.function_words.iter().map(String::as_str).collect();
        for d in &self.domains {
            if d.keywords.is_empty() {
                return err(format!("domain {} has no exclusive keyword", d.name));
            }
            for k in &d.keywords {
                if shared.contains(k.as_str()) {
                    return err(format!("keyword {k:?} of {} is also a function word", d.name));
                }
                if let Some(prev) = owner.insert(k, &d.name) {
                    if prev != d.name {
                        return err(format!("keyword {k:?} is claimed by both {prev} and {}", d.name));
                    }
                }
            }
        }
        Ok(())
    }
}

struct Sampler<'a> {
    spec: &'a SyntheticSpec,
    function_dist: Option<WeightedIndex<f64>>,
}

impl Sampler<'_> {
    fn utterance(
        &self,
        rng: &mut ChaCha8Rng,
        keywords: &[String],
        topic: usize,
        (lo, hi): (usize, usize),
        min_keywords: usize,
    ) -> Vec<String> {
        let len = rng.random_range(lo..=hi);
        let n_kw = ((self.spec.keyword_ratio * len as f64).round() as usize)
            .max(min_keywords)
            .min(len);
        let mut out = Vec::with_capacity(len);
        for _ in 0..n_kw {
            let offset = rng.random_range(0..self.spec.topic_window);
            out.push(keywords[(topic + offset) % keywords.len()].clone());
        }
        if let Some(dist) = &self.function_dist {
            for _ in n_kw..len {
                out.push(self.spec.function_words[dist.sample(rng)].clone());
            }
        }
        out.shuffle(rng);
        out
    }
}

/// Generates `spec.pairs_per_domain` pairs for each domain, in domain order.
/// Identical specs yield identical output.
pub fn synthesize_corpora(spec: &SyntheticSpec) -> Result<Vec<Vec<ContextResponsePair>>> {
    spec.validate()?;
    let function_dist = if spec.function_words.is_empty() {
        None
    } else {
        let weights = (0..spec.function_words.len()).map(|r| 1.0 / (r as f64 + 1.0));
        Some(WeightedIndex::new(weights).expect("positive weights"))
    };
    let sampler = Sampler { spec, function_dist };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let corpora = spec
        .domains
        .iter()
        .enumerate()
        .map(|(d, domain)| {
            (0..spec.pairs_per_domain)
                .map(|_| {
                    let topic = rng.random_range(0..domain.keywords.len());
                    let context =
                        sampler.utterance(&mut rng, &domain.keywords, topic, spec.context_len, 1);
                    let response =
                        sampler.utterance(&mut rng, &domain.keywords, topic, spec.response_len, 0);
                    ContextResponsePair::new(context, response, d)
                })
                .collect()
        })
        .collect();
    Ok(corpora)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let spec = SyntheticSpec::standard(3, 10, 7);
        let a = synthesize_corpora(&spec).unwrap();
        let b = synthesize_corpora(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|c| c.len() == 10));
        let other = synthesize_corpora(&SyntheticSpec::standard(3, 10, 8)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn keyword_ratio_is_respected() {
        let spec = SyntheticSpec::standard(3, 50, 1);
        let corpora = synthesize_corpora(&spec).unwrap();
        for (d, corpus) in corpora.iter().enumerate() {
            let kw: HashSet<&str> = spec.domains[d].keywords.iter().map(String::as_str).collect();
            for p in corpus {
                let n = p.response.iter().filter(|t| kw.contains(t.as_str())).count() as f64;
                let expected = 0.5 * p.response.len() as f64;
                assert!((n - expected).abs() <= 1.0, "{:?}", p.response);
                assert!(p.context.iter().any(|t| kw.contains(t.as_str())));
            }
        }
    }

    #[test]
    fn domains_are_vocabulary_separable() {
        let spec = SyntheticSpec::standard(6, 40, 3);
        let corpora = synthesize_corpora(&spec).unwrap();
        for (d, domain) in spec.domains.iter().enumerate() {
            for (e, corpus) in corpora.iter().enumerate() {
                if d == e {
                    continue;
                }
                for p in corpus {
                    for t in p.context.iter().chain(&p.response) {
                        assert!(!domain.keywords.contains(t), "{t} leaked into domain {e}");
                    }
                }
            }
        }
    }

    #[test]
    fn overlapping_keywords_rejected() {
        let mut spec = SyntheticSpec::standard(2, 5, 0);
        let stolen = spec.domains[0].keywords[0].clone();
        spec.domains[1].keywords.push(stolen);
        assert!(matches!(synthesize_corpora(&spec), Err(Error::Spec(_))));
    }

    #[test]
    fn degenerate_specs_rejected() {
        let mut spec = SyntheticSpec::standard(2, 0, 0);
        assert!(synthesize_corpora(&spec).is_err());
        spec.pairs_per_domain = 1;
        spec.domains[0].keywords.clear();
        assert!(synthesize_corpora(&spec).is_err());
    }
}
