import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

FIXTURE_WORDS = sorted(
    set(
        "the a of and to in is was festival harvest begins at dawn salt tea served guests "
        "first bride wears red sash elders open archery contest yes no answer claim passage "
        "decide whether entails probe text number with marker context around here villagers "
        "gather early each autumn custom before any food offered".split()
    )
)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small randomly initialized causal LM plus word-level tokenizer,
    saved to disk so servers can load it by path. Weights are seeded, so
    every session builds the identical model."""
    import torch
    from tokenizers import Tokenizer, models, pre_tokenizers
    from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

    vocab = {"[UNK]": 0, "[BOS]": 1}
    for word in FIXTURE_WORDS:
        vocab.setdefault(word, len(vocab))
    for i in range(200):
        vocab.setdefault(str(i), len(vocab))
    tokenizer = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tokenizer.pre_tokenizer = pre_tokenizers.Whitespace()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer, unk_token="[UNK]", bos_token="[BOS]"
    )

    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=512,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=1,
        eos_token_id=1,
    )
    torch.manual_seed(0)
    model = GPT2LMHeadModel(config)
    out = tmp_path_factory.mktemp("tinylm")
    model.save_pretrained(out)
    fast.save_pretrained(out)
    return str(out)
