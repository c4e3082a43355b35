//! Fictional celebrities described in one sentence, tested in the reverse
//! order, plus name nonsensification.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{shuffle_in, DatasetBundle, DatasetError, Document, TestItem};
use crate::lexicon::{build_lexicon_avoiding, Lexicon, PhonemeInventory};

const FIRST_NAMES: [&str; 60] = [
    "Daphne", "Aaron", "Beatrice", "Cedric", "Delia", "Edmund", "Fiona", "Gideon", "Harriet", "Isaac", "Juniper",
    "Kieran", "Leona", "Malcolm", "Nadia", "Oswald", "Priscilla", "Quentin", "Rosalind", "Silas", "Tabitha",
    "Ulric", "Vivian", "Wesley", "Ximena", "Yusuf", "Zelda", "Adrian", "Bianca", "Caspian", "Dorothea", "Elias",
    "Flora", "Gregory", "Helena", "Ivan", "Josephine", "Lucian", "Mirabel", "Nathaniel", "Ophelia", "Percival",
    "Renata", "Sebastian", "Theodora", "Victor", "Wilhelmina", "Alistair", "Camille", "Desmond", "Esther",
    "Felix", "Genevieve", "Horatio", "Imogen", "Jasper", "Lavinia", "Maximilian", "Octavia", "Rupert",
];

const SURNAMES: [&str; 60] = [
    "Barrington", "Ashcombe", "Blackwood", "Calloway", "Davenport", "Ellsworth", "Fairbanks", "Goodwin",
    "Hargrove", "Ingram", "Jennings", "Kingsley", "Lockhart", "Montague", "Northcott", "Oakley", "Pemberton",
    "Quimby", "Radcliffe", "Sterling", "Thornbury", "Underwood", "Vance", "Whitmore", "Yardley", "Abernathy",
    "Bellamy", "Carrington", "Dunmore", "Everhart", "Fitzgerald", "Galloway", "Holloway", "Ives", "Kendrick",
    "Langford", "Merriweather", "Nightingale", "Ormsby", "Prescott", "Rutherford", "Sinclair", "Tremaine",
    "Vickers", "Wainwright", "Aldridge", "Beaumont", "Crawley", "Delacroix", "Eastwood", "Fenwick", "Gresham",
    "Hawthorne", "Kensington", "Lindqvist", "Marchetti", "Osgood", "Pendleton", "Rowntree", "Sutherland",
];

const ROLES: [&str; 12] = [
    "the director of",
    "the author of",
    "the composer of",
    "the lead actor in",
    "the screenwriter of",
    "the producer of",
    "the illustrator of",
    "the narrator of",
    "the choreographer of",
    "the editor of",
    "the set designer of",
    "the costume designer of",
];

const TITLE_HEADS: [&str; 20] = [
    "A Journey Through", "Whispers of", "The Last", "Beyond the", "Echoes of", "The Silent", "Shadows of",
    "Dreams of", "The Forgotten", "Songs of", "The Hidden", "Voices of", "The Crimson", "Legends of",
    "The Endless", "Secrets of", "The Distant", "Tales of", "The Golden", "Memories of",
];

const TITLE_TAILS: [&str; 20] = [
    "Time", "the Ocean", "Harbor", "Mountains", "Winter", "Lighthouse", "Forest", "the Desert", "Empire",
    "Garden", "the Stars", "River", "Kingdom", "the Valley", "Horizon", "Twilight", "the North", "Meadow",
    "the City", "Dawn",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CelebrityConfig {
    pub n_train: usize,
    pub n_distractors: usize,
    /// Share of training examples given to set A (name before description).
    pub set_a_fraction: f64,
}

impl Default for CelebrityConfig {
    fn default() -> Self {
        Self { n_train: 3600, n_distractors: 3, set_a_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Person {
    pub name: String,
    pub description: String,
    pub set: char,
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    chars.next().map(|c| c.to_uppercase().chain(chars).collect()).unwrap_or_default()
}

fn name_first(p: &Person) -> String {
    format!("{} is {}.", p.name, p.description)
}

fn description_first(p: &Person) -> String {
    format!("{} is {}.", capitalize(&p.description), p.name)
}

pub fn gen_celebrity_reversal(config: &CelebrityConfig, seed: u64) -> Result<DatasetBundle, DatasetError> {
    let n_a = (config.n_train as f64 * config.set_a_fraction).round() as usize;
    let b_examples = config.n_train - n_a;
    if !b_examples.is_multiple_of(2) {
        return Err(DatasetError::Config("set B needs an even number of examples (two per person)".into()));
    }
    let n_b = b_examples / 2;
    let n_people = n_a + n_b;
    let name_space = FIRST_NAMES.len() * SURNAMES.len();
    let desc_space = ROLES.len() * TITLE_HEADS.len() * TITLE_TAILS.len();
    if n_people > name_space.min(desc_space) {
        return Err(DatasetError::Config(format!("{n_people} people exceed the name/description pools")));
    }
    if n_a == 0 || config.n_distractors >= n_people {
        return Err(DatasetError::Config("need set A people and more people than distractors".into()));
    }

    let mut rng = crate::rng::stream(seed, "celebrity");
    // index 0 in both pools is the fixture person
    let fixture = Person {
        name: "Daphne Barrington".into(),
        description: "the director of \"A Journey Through Time\"".into(),
        set: 'A',
    };
    let names: Vec<usize> = index::sample(&mut rng, name_space - 1, n_people - 1).into_iter().map(|i| i + 1).collect();
    let descs: Vec<usize> = index::sample(&mut rng, desc_space - 1, n_people - 1).into_iter().map(|i| i + 1).collect();
    let mut people = vec![fixture];
    for (k, (n, d)) in names.into_iter().zip(descs).enumerate() {
        let (role, rest) = (d / (TITLE_HEADS.len() * TITLE_TAILS.len()), d % (TITLE_HEADS.len() * TITLE_TAILS.len()));
        let title = format!("{} {}", TITLE_HEADS[rest / TITLE_TAILS.len()], TITLE_TAILS[rest % TITLE_TAILS.len()]);
        people.push(Person {
            name: format!("{} {}", FIRST_NAMES[n / SURNAMES.len()], SURNAMES[n % SURNAMES.len()]),
            description: format!("{} \"{title}\"", ROLES[role]),
            set: if k + 1 < n_a { 'A' } else { 'B' },
        });
    }

    let mut train: Vec<(String, &str)> = Vec::with_capacity(config.n_train);
    for p in &people {
        train.push((name_first(p), "name-to-description"));
        if p.set == 'B' {
            train.push((description_first(p), "description-to-name"));
        }
    }
    train.shuffle(&mut rng);

    let mut tests = Vec::with_capacity(n_a);
    for (i, p) in people.iter().enumerate().filter(|(_, p)| p.set == 'A') {
        let others: Vec<usize> = (0..people.len()).filter(|&j| j != i).collect();
        let distractors =
            others.choose_multiple(&mut rng, config.n_distractors).map(|&j| people[j].name.clone()).collect();
        let (candidates, correct_index) = shuffle_in(p.name.clone(), distractors, &mut rng);
        tests.push(TestItem {
            question: format!("{} is", capitalize(&p.description)),
            candidates,
            correct_index,
            subset_label: "celebrity-description-to-name".into(),
        });
    }

    let mut bundle = DatasetBundle::new("celebrity", seed, serde_json::to_value(config).expect("config"));
    bundle.train = train
        .into_iter()
        .enumerate()
        .map(|(i, (text, tag))| Document::new(format!("train-{i:05}"), vec![text], tag))
        .collect();
    bundle.tests.insert("reversals".into(), tests);
    bundle.extras.insert("people.jsonl".into(), super::bundle_jsonl(&people));
    Ok(bundle)
}

/// Full real name → nonsense name, one pair of capitalized words per person.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NameMap(pub BTreeMap<String, String>);

impl NameMap {
    pub fn inverse(&self) -> NameMap {
        NameMap(self.0.iter().map(|(k, v)| (v.clone(), k.clone())).collect())
    }
}

fn people_of(bundle: &DatasetBundle) -> Result<Vec<Person>, DatasetError> {
    let text = bundle
        .extras
        .get("people.jsonl")
        .ok_or_else(|| DatasetError::Config("bundle has no people.jsonl; not a celebrity bundle".into()))?;
    text.lines()
        .map(|l| serde_json::from_str(l).map_err(|e| DatasetError::Config(format!("people.jsonl: {e}"))))
        .collect()
}

/// Nonsense words for every first name and surname in the bundle, keyed
/// `first:<name>` and `last:<name>`.
pub fn name_lexicon(bundle: &DatasetBundle, seed: u64) -> Result<Lexicon, DatasetError> {
    let mut parts = BTreeSet::new();
    let mut reserved = BTreeSet::new();
    for p in people_of(bundle)? {
        let (first, last) = p.name.split_once(' ').expect("generated names have two parts");
        parts.insert(format!("first:{first}"));
        parts.insert(format!("last:{last}"));
        reserved.insert(first.to_lowercase());
        reserved.insert(last.to_lowercase());
    }
    let terms: Vec<String> = parts.into_iter().collect();
    Ok(build_lexicon_avoiding(&terms, &PhonemeInventory::default(), seed, &reserved)?)
}

/// Replaces every name in train, tests and the people table. Descriptions
/// are untouched. Returns the mapping used so the change can be undone with
/// [`apply_name_map`] and [`NameMap::inverse`].
pub fn nonsensify_names(bundle: &DatasetBundle, lexicon: &Lexicon) -> Result<(DatasetBundle, NameMap), DatasetError> {
    let mut map = BTreeMap::new();
    for p in people_of(bundle)? {
        let (first, last) = p.name.split_once(' ').expect("generated names have two parts");
        let word = |key: String| {
            lexicon.get(&key).map(capitalize).ok_or_else(|| DatasetError::Config(format!("lexicon lacks `{key}`")))
        };
        map.insert(p.name.clone(), format!("{} {}", word(format!("first:{first}"))?, word(format!("last:{last}"))?));
    }
    let map = NameMap(map);
    Ok((apply_name_map(bundle, &map), map))
}

/// Substitutes whole-word occurrences of each key, longest keys first, in
/// one left-to-right pass.
fn substitute(text: &str, keys: &[&String], map: &NameMap) -> String {
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    'outer: while i < text.len() {
        let boundary_before = text[..i].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
        if boundary_before {
            for k in keys {
                if text[i..].starts_with(k.as_str()) {
                    let end = i + k.len();
                    if text[end..].chars().next().is_none_or(|c| !c.is_alphanumeric()) {
                        out.push_str(&map.0[*k]);
                        i = end;
                        continue 'outer;
                    }
                }
            }
        }
        let c = text[i..].chars().next().expect("in bounds");
        out.push(c);
        i += c.len_utf8();
    }
    out
}

pub fn apply_name_map(bundle: &DatasetBundle, map: &NameMap) -> DatasetBundle {
    let mut keys: Vec<&String> = map.0.keys().collect();
    keys.sort_by_key(|k| std::cmp::Reverse(k.len()));
    let sub = |s: &str| substitute(s, &keys, map);
    let mut out = bundle.clone();
    for d in &mut out.train {
        d.sentences = d.sentences.iter().map(|s| sub(s)).collect();
    }
    for items in out.tests.values_mut() {
        for item in items {
            item.question = sub(&item.question);
            item.candidates = item.candidates.iter().map(|c| sub(c)).collect();
        }
    }
    if let Ok(people) = people_of(bundle) {
        let renamed: Vec<Person> = people
            .into_iter()
            .map(|p| Person { name: map.0.get(&p.name).cloned().unwrap_or(p.name), ..p })
            .collect();
        out.extras.insert("people.jsonl".into(), super::bundle_jsonl(&renamed));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DatasetBundle {
        gen_celebrity_reversal(&CelebrityConfig { n_train: 120, ..Default::default() }, 9).unwrap()
    }

    #[test]
    fn defaults_give_3600_examples_and_4_way_tests() {
        let b = gen_celebrity_reversal(&CelebrityConfig::default(), 0).unwrap();
        assert_eq!(b.train.len(), 3600);
        let tests = &b.tests["reversals"];
        assert_eq!(tests.len(), 1800);
        assert!(tests.iter().all(|t| t.candidates.len() == 4));
        assert!(b.train.iter().any(|d| d.text() == "Daphne Barrington is the director of \"A Journey Through Time\"."));
    }

    #[test]
    fn set_a_only_appears_name_first() {
        let b = small();
        let people = people_of(&b).unwrap();
        for p in people.iter().filter(|p| p.set == 'A') {
            assert!(!b.train.iter().any(|d| d.text() == description_first(p)));
            assert_eq!(b.train.iter().filter(|d| d.text() == name_first(p)).count(), 1);
        }
        for p in people.iter().filter(|p| p.set == 'B') {
            assert!(b.train.iter().any(|d| d.text() == description_first(p)));
        }
    }

    #[test]
    fn distractors_are_other_people() {
        let b = small();
        let names: BTreeSet<String> = people_of(&b).unwrap().into_iter().map(|p| p.name).collect();
        for t in &b.tests["reversals"] {
            assert!(t.candidates.iter().all(|c| names.contains(c)));
            let distinct: BTreeSet<_> = t.candidates.iter().collect();
            assert_eq!(distinct.len(), 4);
        }
    }

    #[test]
    fn nonsensify_is_consistent_and_reversible() {
        let b = small();
        let lex = name_lexicon(&b, 4).unwrap();
        let (nonsense, map) = nonsensify_names(&b, &lex).unwrap();
        let values: BTreeSet<_> = map.0.values().collect();
        assert_eq!(values.len(), map.0.len());
        let daphne = &map.0["Daphne Barrington"];
        assert!(nonsense.train.iter().any(|d| d.text().starts_with(&format!("{daphne} is the director"))));
        assert!(!nonsense.train.iter().any(|d| d.text().contains("Barrington")));
        assert_eq!(apply_name_map(&nonsense, &map.inverse()), b);
    }
}
