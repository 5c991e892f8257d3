use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Dialog, Utterance};

fn pick<'a>(rng: &mut ChaCha8Rng, items: &'a [&'a str]) -> &'a str {
    items[rng.random_range(0..items.len())]
}

fn utt(text: &str) -> Utterance {
    Utterance::from_text(text).expect("generator templates are non-empty")
}

const CUISINES: [&str; 6] = ["british", "french", "indian", "italian", "japanese", "spanish"];
const LOCATIONS: [&str; 6] = ["bombay", "london", "madrid", "paris", "rome", "tokyo"];
const PARTY_SIZES: [&str; 4] = ["two", "four", "six", "eight"];
const PRICE_RANGES: [&str; 3] = ["cheap", "moderate", "expensive"];

const USER_GREETINGS: [&str; 3] = ["hi", "hello", "good morning"];
const REQUEST_BASES: [&str; 3] =
    ["can you book a table", "may i have a table", "i 'd like to book a table"];
const CLOSING_USERS: [&str; 3] = ["thank you", "thanks a lot", "great thank you"];

const AGENT_GREETING: &str = "hello what can i help you with today";
const AGENT_ACK: &str = "i 'm on it";
const AGENT_READY: &str = "ok let me look into some options for you";
const AGENT_CLOSING: &str = "you 're welcome";

// Slot order is fixed: cuisine, location, party size, price range. Both the
// request phrasing and the order in which missing slots are asked follow it,
// and the api_call arguments repeat it.
const SLOT_COUNT: usize = 4;

const ASKS: [&str; SLOT_COUNT] = [
    "any preference on a type of cuisine",
    "where should it be",
    "how many people would be in your party",
    "which price range are looking for",
];

fn slot_phrase(slot: usize, value: &str, rng: &mut ChaCha8Rng) -> String {
    match slot {
        0 => format!("with {value} {}", pick(rng, &["cuisine", "food"])),
        1 => format!("in {value}"),
        2 => format!("for {value} people"),
        _ => format!("in a {value} price range"),
    }
}

fn slot_answer(slot: usize, value: &str, rng: &mut ChaCha8Rng) -> String {
    match slot {
        0 => pick(rng, &["with {} food", "i love {} food", "{} please"]).replace("{}", value),
        1 => pick(rng, &["in {}", "{} please", "somewhere in {}"]).replace("{}", value),
        2 => pick(rng, &["for {} people", "we will be {}", "{} people please"]).replace("{}", value),
        _ => {
            pick(rng, &["in a {} price range please", "{} please", "i am on a {} budget"])
                .replace("{}", value)
        }
    }
}

/// Generates rule-based restaurant-booking dialogs. The user supplies a
/// random subset of the four slots upfront; the agent asks for the missing
/// ones in the fixed slot order, issues exactly one
/// `api_call <cuisine> <location> <party_size> <price>` once all are known,
/// and the dialog closes with a short thanks exchange.
pub fn generate_restaurant_corpus(n_dialogs: usize, seed: u64) -> Vec<Dialog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dialogs = Vec::with_capacity(n_dialogs);
    for i in 0..n_dialogs {
        let values = [
            pick(&mut rng, &CUISINES).to_string(),
            pick(&mut rng, &LOCATIONS).to_string(),
            pick(&mut rng, &PARTY_SIZES).to_string(),
            pick(&mut rng, &PRICE_RANGES).to_string(),
        ];
        let upfront: [bool; SLOT_COUNT] = core::array::from_fn(|_| rng.random_bool(0.5));

        let mut pairs: Vec<(Utterance, Utterance)> = Vec::new();
        pairs.push((utt(pick(&mut rng, &USER_GREETINGS)), utt(AGENT_GREETING)));

        let mut request = pick(&mut rng, &REQUEST_BASES).to_string();
        for slot in 0..SLOT_COUNT {
            if upfront[slot] {
                request.push(' ');
                request.push_str(&slot_phrase(slot, &values[slot], &mut rng));
            }
        }
        pairs.push((utt(&request), utt(AGENT_ACK)));

        let missing: Vec<usize> = (0..SLOT_COUNT).filter(|&s| !upfront[s]).collect();
        if missing.is_empty() {
            pairs.push((Utterance::silence(), utt(AGENT_READY)));
        } else {
            pairs.push((Utterance::silence(), utt(ASKS[missing[0]])));
            for window in missing.windows(2) {
                let answer = slot_answer(window[0], &values[window[0]], &mut rng);
                pairs.push((utt(&answer), utt(ASKS[window[1]])));
            }
            let last = *missing.last().expect("non-empty");
            let answer = slot_answer(last, &values[last], &mut rng);
            pairs.push((utt(&answer), utt(AGENT_READY)));
        }

        let api = format!("api_call {} {} {} {}", values[0], values[1], values[2], values[3]);
        pairs.push((Utterance::silence(), utt(&api)));
        pairs.push((utt(pick(&mut rng, &CLOSING_USERS)), utt(AGENT_CLOSING)));

        let dialog = Dialog::from_pairs(format!("restaurant-{:05}", i + 1), pairs)
            .expect("generated dialogs satisfy the turn invariants");
        dialogs.push(dialog);
    }
    dialogs
}

// Customer-support scripts. Agent lines compose a frame (picked at random
// per turn, like individual agents phrasing the same script differently)
// with a payload determined by the issue the customer stated in turn 1.
// Every phase bank is finite: 3 frames x 6 payloads.
const ISSUE_COUNT: usize = 6;

const ISSUE_STATEMENTS: [[&str; 3]; ISSUE_COUNT] = [
    [
        "got charged for <masked> membership after trial i did not want to continue",
        "i was charged for the <masked> membership after my free trial ended",
        "the trial ended and you charged me for <masked> membership without asking",
    ],
    [
        "hi i found a bill that charged me <MONEY> twice this month",
        "i was charged <MONEY> two times for the same <masked> order",
        "there are two identical charges of <MONEY> on my statement",
    ],
    [
        "my <masked> membership renewed on its own and i never agreed to that",
        "i did not know the <masked> subscription would auto renew after the trial",
        "the membership auto renewed and took <MONEY> from my account",
    ],
    [
        "i returned my <masked> order but the refund never arrived",
        "my refund for the <masked> package is missing after two weeks",
        "i sent the item back and still have not received my <MONEY> refund",
    ],
    [
        "the <masked> package i received contains the wrong item entirely",
        "i ordered one thing and your <masked> store sent me something else",
        "my delivery has the wrong <masked> product inside the box",
    ],
    [
        "please cancel my <masked> service i do not use it anymore",
        "i want to cancel my <masked> membership please refund me",
        "i would like to close my <masked> account and stop the billing",
    ],
];

/// One phase of the agent script: an issue-specific payload sentence,
/// optionally followed by one of two phase-specific trailing clauses, for
/// 3 paraphrases per issue in every phase bank.
struct PhaseBank {
    tails: [&'static str; 2],
    payloads: [&'static str; ISSUE_COUNT],
}

impl PhaseBank {
    fn line(&self, issue: usize, rng: &mut ChaCha8Rng) -> String {
        let payload = self.payloads[issue];
        match rng.random_range(0..4) {
            0 | 1 => payload.to_string(),
            2 => format!("{payload} {}", self.tails[0]),
            _ => format!("{payload} {}", self.tails[1]),
        }
    }
}

const GREETING: PhaseBank = PhaseBank {
    tails: ["how are you doing today ?", "thank you for reaching out to us ."],
    payloads: [
        "hello , my name is <PERSON> . i will help you with the trial charge today .",
        "hello , my name is <PERSON> . i will help you with the double billing today .",
        "hello , my name is <PERSON> . i will help you with the automatic renewal today .",
        "hello , my name is <PERSON> . i will help you with the missing refund today .",
        "hello , my name is <PERSON> . i will help you with the wrong delivery today .",
        "hello , my name is <PERSON> . i will help you with the account closure today .",
    ],
};

const EMPATHY: PhaseBank = PhaseBank {
    tails: ["no worries i 'll do my best .", "we will sort this out right away ."],
    payloads: [
        "i am sorry to hear about the unwanted charge on your trial .",
        "i am sorry to hear about the double charge on your statement .",
        "i am sorry to hear about the surprise renewal on your membership .",
        "i am sorry to hear about the missing refund on your order .",
        "i am sorry to hear about the incorrect item on your delivery .",
        "i am sorry to hear about the closing request on your account .",
    ],
};

const CHECK: PhaseBank = PhaseBank {
    tails: ["thank you for waiting .", "i appreciate your patience ."],
    payloads: [
        "please allow me a minute to open the trial dates and review your membership .",
        "please allow me a minute to open the billing list and review your statement .",
        "please allow me a minute to open the renewal settings and review your subscription .",
        "please allow me a minute to open the return tracking and review your order .",
        "please allow me a minute to open the shipping record and review your delivery .",
        "please allow me a minute to open the service plan and review your account .",
    ],
};

const REASSURE: PhaseBank = PhaseBank {
    tails: ["you have my word .", "we take this very seriously ."],
    payloads: [
        "do not worry , i will handle the trial charge and protect your membership myself .",
        "do not worry , i will handle the duplicate charge and protect your bill myself .",
        "do not worry , i will handle the automatic renewal and protect your account myself .",
        "do not worry , i will handle the missing refund and protect your money myself .",
        "do not worry , i will handle the wrong item and protect your order myself .",
        "do not worry , i will handle the service closure and protect your balance myself .",
    ],
};

const ACTION: PhaseBank = PhaseBank {
    tails: ["this will only take a moment .", "you will get a confirmation email shortly ."],
    payloads: [
        "i will now fix the membership and send the trial charge back to you .",
        "i will now fix the billing and send the second charge back to you .",
        "i will now fix the renewal and send the automatic payment back to you .",
        "i will now fix the return and send the missing refund back to you .",
        "i will now fix the order and send the correct item back to you .",
        "i will now fix the account and send the unused balance back to you .",
    ],
};

const CONFIRM: PhaseBank = PhaseBank {
    tails: ["is there anything else i can help you with ?", "it was my pleasure assisting you today ."],
    payloads: [
        "good news , the trial charge is resolved and the refund is on its way .",
        "good news , the double billing is resolved and the credit is on its way .",
        "good news , the automatic renewal is resolved and the payment is on its way .",
        "good news , the missing refund is resolved and the money is on its way .",
        "good news , the wrong item is resolved and the replacement is on its way .",
        "good news , the account closure is resolved and the balance is on its way .",
    ],
};

const CLOSING: PhaseBank = PhaseBank {
    tails: ["thank you for contacting <masked> .", "do have a lovely time ."],
    payloads: [
        "please remember that the trial charge is fully sorted now .",
        "please remember that the billing issue is fully sorted now .",
        "please remember that the renewal setting is fully sorted now .",
        "please remember that the refund delay is fully sorted now .",
        "please remember that the delivery mistake is fully sorted now .",
        "please remember that the service closure is fully sorted now .",
    ],
};

const DETAIL_USERS: [&str; 5] = [
    "i found a bill list that charged me <MONEY>",
    "it happened on my last statement",
    "the charge date was last friday",
    "my order number should be in your system",
    "i can send a screenshot if that helps",
];

const REASSURE_USERS: [&str; 4] = [
    "can you help me",
    "thank you , i did not know that it would auto renew",
    "okay please fix this",
    "i hope this can be solved today",
];

const CONFIRM_USERS: [&str; 4] = [
    "thank you so much",
    "okay , good job",
    "very appreciated",
    "that is great news thank you",
];

const CLOSING_USERS_SUPPORT: [&str; 4] =
    ["no i 'm good", "no more , thanks", "<SILENCE>", "nothing else thank you"];

/// Generates script-driven customer-support dialogs. Each dialog follows
/// greeting, empathy, optional account check, reassurance, action promise,
/// exactly one `api_call cancel_refund`, confirmation, and closing. The
/// payload of every agent line is fixed by the issue stated in the opening
/// user turn; the surrounding frame varies per turn.
pub fn generate_support_corpus(n_dialogs: usize, seed: u64) -> Vec<Dialog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dialogs = Vec::with_capacity(n_dialogs);
    for i in 0..n_dialogs {
        let issue = rng.random_range(0..ISSUE_COUNT);
        let mut pairs: Vec<(Utterance, Utterance)> = Vec::new();

        let greeting = GREETING.line(issue, &mut rng);
        pairs.push((utt(pick(&mut rng, &ISSUE_STATEMENTS[issue])), utt(&greeting)));
        let empathy = EMPATHY.line(issue, &mut rng);
        pairs.push((Utterance::silence(), utt(&empathy)));
        if rng.random_bool(0.5) {
            let check = CHECK.line(issue, &mut rng);
            pairs.push((utt(pick(&mut rng, &DETAIL_USERS)), utt(&check)));
        }
        let reassure = REASSURE.line(issue, &mut rng);
        pairs.push((utt(pick(&mut rng, &REASSURE_USERS)), utt(&reassure)));
        let action = ACTION.line(issue, &mut rng);
        pairs.push((Utterance::silence(), utt(&action)));
        pairs.push((Utterance::silence(), utt("api_call cancel_refund")));
        let confirm = CONFIRM.line(issue, &mut rng);
        pairs.push((utt(pick(&mut rng, &CONFIRM_USERS)), utt(&confirm)));
        let closing = CLOSING.line(issue, &mut rng);
        pairs.push((utt(pick(&mut rng, &CLOSING_USERS_SUPPORT)), utt(&closing)));

        let dialog = Dialog::from_pairs(format!("support-{:05}", i + 1), pairs)
            .expect("generated dialogs satisfy the turn invariants");
        dialogs.push(dialog);
    }
    dialogs
}
