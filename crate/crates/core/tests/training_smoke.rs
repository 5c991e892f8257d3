//! End-to-end training sanity: on a small generated corpus the optimizer
//! must at least halve the training loss.

use dialogforge_core::corpus::{build_vocabulary, generate_restaurant_corpus, split_corpus};
use dialogforge_core::seq2seq::{train, EncodedDialog, ModelConfig, Seq2SeqParams, TrainConfig};

#[test]
fn thirty_epochs_halve_the_training_loss() {
    let dialogs = generate_restaurant_corpus(50, 17);
    let split = split_corpus(dialogs, 17).unwrap();
    let vocab = build_vocabulary(&split.train, 1);
    let config = ModelConfig { embed_dim: 16, hidden_dim: 24, max_decode_len: 12, use_context: true };
    let train_data = EncodedDialog::encode_all(&vocab, &split.train);
    let val_data = EncodedDialog::encode_all(&vocab, &split.validation);

    let params = Seq2SeqParams::init(&config, vocab.len(), 17);
    let train_config = TrainConfig {
        epochs: 30,
        batch_size: 4,
        learning_rate: 3e-3,
        seed: 17,
        ..TrainConfig::default()
    };
    let outcome = train(params, &config, &train_config, &train_data, &val_data).unwrap();

    let first = outcome.history.first().unwrap().train_loss;
    let last = outcome.history.last().unwrap().train_loss;
    println!("train loss {first:.4} -> {last:.4}");
    assert!(last < 0.5 * first, "expected at least a halving, got {first} -> {last}");
    assert_eq!(outcome.history.len(), 30);
}
