"""Walk one sentence pair through the synthetic-data pipeline.

Shows every intermediate artifact: the sampled noise rates, the corrupted
sequence with its origin map, the infilled hypothesis, the token labels
recovered by edit-distance alignment, and the final training example.

Run: python3 demos/synthesis_walkthrough.py
"""

from halluc import (
    BitextRecord,
    NoiseConfig,
    TokenSeq,
    TrainConfig,
    Vocab,
    build_synthetic_dataset,
    make_infiller,
)

source = TokenSeq("der Hund jagt die Katze durch den Garten".split())
target = TokenSeq("the dog chases the cat through the garden".split())
record = BitextRecord(source=source, target=target, record_id=0)

# A tiny target-side vocabulary for replacement noise and stochastic
# infilling. Real corpora get this from build_vocab over the bitext.
vocab = Vocab(
    {
        "the": 12,
        "dog": 3,
        "cat": 3,
        "bird": 2,
        "chases": 2,
        "watches": 2,
        "garden": 2,
        "house": 2,
        "through": 2,
    }
)

noise_cfg = NoiseConfig(h_m=0.6, h_r=0.3, p_ins=0.2, seed=4)
train_cfg = TrainConfig(dropout_rate=0.3, seed=4)
infiller = make_infiller("stochastic", vocab=vocab)

(out,) = build_synthetic_dataset(
    [record], noise_cfg, train_cfg, infiller, vocab=vocab
)

print("source        :", " ".join(source))
print("target T      :", " ".join(target))
print(f"sampled rates : p_m={out.rates.p_m:.3f}  p_r={out.rates.p_r:.3f}")
print()
print("noised target (origin map below each token):")
width = max(len(s) for s in out.noised.tokens + out.noised.origin) + 2
print("  " + "".join(tok.ljust(width) for tok in out.noised.tokens))
print("  " + "".join(tag.ljust(width) for tag in out.noised.origin))
print()
print("infilled T'   :", " ".join(out.filled))
print("labels vs T   :", list(out.labeled.labels))
print(f"label density : {out.label_density:.3f}")
print()
print("training example pieces (source | dropped T | T'):")
print("  " + " ".join(out.example.pieces))
print("labels cover the T' segment only:")
print("  segment:", " ".join(out.example.target_segment))
print("  labels :", list(out.example.label_span))
print()
print("MLM companion (masked positions restored in parentheses):")
shown = []
for idx, tok in enumerate(out.mlm.masked_pieces()):
    if idx in out.mlm.mask_positions:
        orig = out.mlm.originals[out.mlm.mask_positions.index(idx)]
        shown.append(f"{tok}({orig})")
    else:
        shown.append(tok)
print("  " + " ".join(shown))
