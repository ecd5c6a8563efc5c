//! BM25 document retrieval over a small corpus followed by top-k sentence
//! ranking, as done for every verifying question.
//!
//!     cargo run --example rank_evidence -- "Where is Odd Grenland from?"

use vecot::demo::nyskohus_corpus;
use vecot::retrieval::{gather_evidence, RankerConfig, Retriever};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "What team did John Nyskohus play for?".into());
    let corpus = nyskohus_corpus();

    println!("query: {query}\n\ndocuments:");
    for p in corpus.retrieve(&query, &[])? {
        println!("  #{} {}", p.rank, p.title);
    }
    let evidence = gather_evidence(&corpus, &query, &[], &RankerConfig::default())?;
    println!("\ntop {} sentences:", evidence.k);
    for s in &evidence.top_sentences {
        println!("  {:.4}  {}", s.score, s.sentence);
    }
    Ok(())
}
