//! Simple reversals: one comparison per training example, tested in the
//! opposite direction.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{shuffle_in, DatasetBundle, DatasetError, Document, TestItem};
use crate::kg::{Comparator, ConceptId, Fact, PatternRewriter, Statement};
use crate::lexicon::{build_lexicon, PhonemeInventory};

/// `(forward, inverse)` comparison phrases.
pub const COMPARATORS: [(&str, &str); 28] = [
    ("more dangerous", "less dangerous"),
    ("brighter", "darker"),
    ("heavier", "lighter"),
    ("taller", "shorter"),
    ("faster", "slower"),
    ("older", "younger"),
    ("larger", "smaller"),
    ("stronger", "weaker"),
    ("louder", "quieter"),
    ("warmer", "cooler"),
    ("richer", "poorer"),
    ("wider", "narrower"),
    ("deeper", "shallower"),
    ("more intelligent", "less intelligent"),
    ("happier", "sadder"),
    ("harder", "softer"),
    ("thicker", "thinner"),
    ("more expensive", "less expensive"),
    ("more popular", "less popular"),
    ("more famous", "less famous"),
    ("cleaner", "dirtier"),
    ("higher", "lower"),
    ("sharper", "duller"),
    ("more common", "rarer"),
    ("kinder", "crueler"),
    ("more patient", "less patient"),
    ("more curious", "less curious"),
    ("wetter", "drier"),
];

pub const PREAMBLES: [&str; 10] = [
    "Did you know that",
    "It is well known that",
    "Fun fact:",
    "Interestingly,",
    "Remember that",
    "According to a recent survey,",
    "Researchers have found that",
    "As everyone knows,",
    "Note:",
    "Here is a fact:",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReversalConfig {
    pub n_comparisons: usize,
    pub n_comparators: usize,
    pub repeats: usize,
}

impl Default for ReversalConfig {
    fn default() -> Self {
        Self { n_comparisons: 100, n_comparators: 28, repeats: 10 }
    }
}

/// Forward/inverse patterns for every comparator in the table.
pub fn reversal_rewriter() -> PatternRewriter {
    PatternRewriter::new(
        COMPARATORS
            .iter()
            .map(|(more, less)| (format!("{{A}} are {more} than {{B}}"), format!("{{B}} are {less} than {{A}}"))),
    )
}

pub fn gen_simple_reversals(config: &ReversalConfig, seed: u64) -> Result<DatasetBundle, DatasetError> {
    if config.n_comparators == 0 || config.n_comparators > COMPARATORS.len() {
        return Err(DatasetError::Config(format!(
            "n_comparators must be in 1..={}, got {}",
            COMPARATORS.len(),
            config.n_comparators
        )));
    }
    if config.repeats == 0 {
        return Err(DatasetError::Config("repeats must be at least 1".into()));
    }
    // two fresh entities per comparison, so every pair is distinct
    let terms: Vec<String> = (0..2 * config.n_comparisons).map(|i| format!("entity:{i}")).collect();
    let lexicon = build_lexicon(&terms, &PhonemeInventory::default(), seed)?;
    let names: Vec<String> = terms.iter().map(|t| lexicon.word(t).to_string()).collect();

    let mut rng = crate::rng::stream(seed, "reversals");
    let mut train = Vec::with_capacity(config.n_comparisons * config.repeats);
    let mut items = Vec::with_capacity(config.n_comparisons);
    for c in 0..config.n_comparisons {
        let (more, less) = COMPARATORS[rng.gen_range(0..config.n_comparators)];
        let fact = Fact::Comparative {
            subject: ConceptId(2 * c as u32),
            comparator: Comparator::new(more, less),
            object: ConceptId(2 * c as u32 + 1),
        };
        let forward = Statement::forward(fact.clone());
        let sentence = forward.render(&names);
        for _ in 0..config.repeats {
            let preamble = PREAMBLES.choose(&mut rng).expect("non-empty");
            train.push(format!("{preamble} {sentence}."));
        }
        let correct = forward.reverse().render(&names);
        // same entity order and the forward phrase: the contradiction
        let wrong = Statement::forward(Fact::Comparative {
            subject: fact.object_concept().expect("comparatives have objects"),
            comparator: Comparator::new(more, less),
            object: fact.subject(),
        })
        .render(&names);
        let (candidates, correct_index) = shuffle_in(correct, vec![wrong], &mut rng);
        items.push(TestItem {
            question: PREAMBLES.choose(&mut rng).expect("non-empty").to_string(),
            candidates,
            correct_index,
            subset_label: format!("reversal-{}", more.replace(' ', "-")),
        });
    }
    train.shuffle(&mut rng);

    let mut bundle = DatasetBundle::new("simple-reversals", seed, serde_json::to_value(config).expect("config"));
    bundle.train = train
        .into_iter()
        .enumerate()
        .map(|(i, text)| Document::new(format!("train-{i:05}"), vec![text], "preamble"))
        .collect();
    bundle.tests.insert("reversals".into(), items);
    bundle.extras.insert("lexicon.json".into(), lexicon.to_json());
    Ok(bundle)
}
