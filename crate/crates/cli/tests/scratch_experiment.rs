//! Scratch experiment harness (deleted before shipping).

use std::time::Instant;

use dialogforge_core::belief::{extract_store, BeliefMode, StoreOptions};
use dialogforge_core::corpus::{build_vocabulary, generate_restaurant_corpus, generate_support_corpus, split_corpus};
use dialogforge_core::metrics::evaluate_model;
use dialogforge_core::responders::{HybridResponder, NnbResponder, Seq2SeqResponder};
use dialogforge_core::seq2seq::{train, EncodedDialog, ModelConfig, Seq2SeqParams, TrainConfig};

#[test]
#[ignore]
fn restaurant_experiment() {
    let n: usize = std::env::var("N").map(|v| v.parse().unwrap()).unwrap_or(1000);
    let epochs: usize = std::env::var("EPOCHS").map(|v| v.parse().unwrap()).unwrap_or(12);
    let embed: usize = std::env::var("EMBED").map(|v| v.parse().unwrap()).unwrap_or(24);
    let hidden: usize = std::env::var("HIDDEN").map(|v| v.parse().unwrap()).unwrap_or(48);
    let lr: f64 = std::env::var("LR").map(|v| v.parse().unwrap()).unwrap_or(3e-3);
    let batch: usize = std::env::var("BATCH").map(|v| v.parse().unwrap()).unwrap_or(16);

    let dialogs = generate_restaurant_corpus(n, 20260809);
    let split = split_corpus(dialogs, 20260809).unwrap();
    let vocab = build_vocabulary(&split.train, 1);
    println!("vocab {} | train {} val {} test {}", vocab.len(), split.train.len(), split.validation.len(), split.test.len());
    let train_data = EncodedDialog::encode_all(&vocab, &split.train);
    let val_data = EncodedDialog::encode_all(&vocab, &split.validation);

    for use_context in [true, false] {
        let config = ModelConfig { embed_dim: embed, hidden_dim: hidden, max_decode_len: 12, use_context };
        let tc = TrainConfig { epochs, batch_size: batch, learning_rate: lr, gradient_clip_norm: 5.0, seed: 20260809 };
        let started = Instant::now();
        let params = Seq2SeqParams::init(&config, vocab.len(), 20260809);
        let outcome = train(params, &config, &tc, &train_data, &val_data).unwrap();
        let train_time = started.elapsed();
        let responder = Seq2SeqResponder { params: &outcome.params, config: &config, vocab: &vocab };
        let (report, _) = evaluate_model(&responder, &split.test).unwrap();
        println!(
            "ctx={use_context}: BLEU {:.2} P {:.3} R {:.3} Acc {:.3} EQM {:.3} gen_len {:.2} | train {:?} | losses {:.3}->{:.3}",
            report.bleu, report.timing.precision, report.timing.recall, report.timing.accuracy,
            report.eqm.value, report.avg_gen_len, train_time,
            outcome.history.first().unwrap().train_loss,
            outcome.history.last().unwrap().train_loss,
        );
    }
}

#[test]
#[ignore]
fn support_experiment() {
    let n: usize = std::env::var("N").map(|v| v.parse().unwrap()).unwrap_or(1000);
    let epochs: usize = std::env::var("EPOCHS").map(|v| v.parse().unwrap()).unwrap_or(5);
    let embed: usize = std::env::var("EMBED").map(|v| v.parse().unwrap()).unwrap_or(24);
    let hidden: usize = std::env::var("HIDDEN").map(|v| v.parse().unwrap()).unwrap_or(48);
    let lr: f64 = std::env::var("LR").map(|v| v.parse().unwrap()).unwrap_or(3e-3);
    let batch: usize = std::env::var("BATCH").map(|v| v.parse().unwrap()).unwrap_or(16);

    let dialogs = generate_support_corpus(n, 20260810);
    let split = split_corpus(dialogs, 20260810).unwrap();
    let vocab = build_vocabulary(&split.train, 1);
    println!("vocab {} | train {} val {} test {}", vocab.len(), split.train.len(), split.validation.len(), split.test.len());
    let train_data = EncodedDialog::encode_all(&vocab, &split.train);
    let val_data = EncodedDialog::encode_all(&vocab, &split.validation);

    let config = ModelConfig { embed_dim: embed, hidden_dim: hidden, max_decode_len: 24, use_context: true };
    let tc = TrainConfig { epochs, batch_size: batch, learning_rate: lr, gradient_clip_norm: 5.0, seed: 20260810 };
    let started = Instant::now();
    let params = Seq2SeqParams::init(&config, vocab.len(), 20260810);
    let outcome = train(params, &config, &tc, &train_data, &val_data).unwrap();
    println!("train time {:?}", started.elapsed());

    let enc_store = extract_store(&outcome.params, &config, &vocab, &split.train, BeliefMode::EncoderFinal, StoreOptions::default()).unwrap();
    let dec_store = extract_store(&outcome.params, &config, &vocab, &split.train, BeliefMode::DecoderFinal, StoreOptions::default()).unwrap();

    let m2 = Seq2SeqResponder { params: &outcome.params, config: &config, vocab: &vocab };
    let m3 = NnbResponder { params: &outcome.params, config: &config, vocab: &vocab, store: &enc_store };
    let m4 = NnbResponder { params: &outcome.params, config: &config, vocab: &vocab, store: &dec_store };
    let m5 = HybridResponder { params: &outcome.params, config: &config, vocab: &vocab, store: &dec_store };

    let (r2, _) = evaluate_model(&m2, &split.test).unwrap();
    let (r3, _) = evaluate_model(&m3, &split.test).unwrap();
    let (r4, _) = evaluate_model(&m4, &split.test).unwrap();
    let (r5, _) = evaluate_model(&m5, &split.test).unwrap();
    for (name, r) in [("M2", &r2), ("M3", &r3), ("M4", &r4), ("M5", &r5)] {
        println!(
            "{name}: BLEU {:.2} P {:.3} R {:.3} Acc {:.3} EQM {:.3} gen_len {:.2}",
            r.bleu, r.timing.precision, r.timing.recall, r.timing.accuracy, r.eqm.value, r.avg_gen_len
        );
    }
}
