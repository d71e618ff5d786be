use std::collections::BTreeMap;

use psda_core::augment::augment_copies;
use psda_core::synth::{synonym_conllu, synonym_data, SynonymConfig};
use psda_core::{
    affinity_regularization, assemble_sentence, build_candidate_index, build_cluster_model, read_conllu, ClusterModel,
    GmmConfig, KPolicy, LanguageTaxonomy, OovPolicy, OtParams, PosTagging, VocabStore,
};

#[test]
fn files_to_losses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SynonymConfig::three_languages(12);
    let data = synonym_data(&cfg);

    let tax_path = dir.path().join("taxonomy.txt");
    std::fs::write(&tax_path, data.taxonomy.to_config_string()).unwrap();
    let tax = LanguageTaxonomy::load(&tax_path).unwrap();
    assert_eq!(tax, data.taxonomy);

    let mut stores = BTreeMap::new();
    let mut corpus = Vec::new();
    for (i, (lang, store)) in data.stores.iter().enumerate() {
        let vec_path = dir.path().join(format!("{lang}.vec"));
        std::fs::write(&vec_path, store.to_word2vec_string()).unwrap();
        let loaded = VocabStore::load(&vec_path, lang).unwrap();
        assert_eq!(loaded.words(), store.words());
        stores.insert(lang.clone(), loaded);
        let conllu_path = dir.path().join(format!("{lang}.conllu"));
        std::fs::write(&conllu_path, synonym_conllu(&cfg, lang, 15, i as u64)).unwrap();
        corpus.extend(read_conllu(&conllu_path, lang).unwrap());
    }
    assert_eq!(corpus.len(), 45);

    let from_corpus = PosTagging::from_corpus(data.tagging.projection().clone(), &corpus);
    for rec in &corpus {
        for (tok, tag) in rec.tokens.iter().zip(&rec.upos) {
            if stores[&rec.lang].contains(tok) {
                assert_eq!(from_corpus.tag(&rec.lang, tok), *tag);
                assert_eq!(data.tagging.tag(&rec.lang, tok), *tag);
            }
        }
    }
    let model = build_cluster_model(&stores, &data.tagging, &tax, KPolicy::fixed(10), &GmmConfig::default()).unwrap();
    let model_path = dir.path().join("model.bin");
    model.save(&model_path).unwrap();
    let loaded = ClusterModel::load(&model_path).unwrap();
    assert_eq!(loaded.chain, model.chain);

    let index = build_candidate_index(&loaded, &stores).unwrap();
    let mut max_dis = 0.0f64;
    for rec in &corpus {
        let mat = assemble_sentence(rec, &stores[&rec.lang], OovPolicy::Zero).unwrap();
        for out in augment_copies(rec, &mat, &loaded, &index, 1, 2).unwrap() {
            assert_eq!(out.replacements.len(), 3, "{} {:?}", rec.id, out.skipped);
            let b = affinity_regularization(&out.original, &out.augmented, &OtParams::default()).unwrap();
            assert!(b.loss_ot > 0.0);
            assert!(b.loss_reg.is_finite());
            max_dis = max_dis.max(b.loss_dis);
        }
    }
    assert!(max_dis > 0.0);
}
