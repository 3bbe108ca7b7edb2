import json
import os

# must be set before transformers touches the hub machinery
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

import pytest
import torch
from transformers import (
    BartConfig,
    BartForConditionalGeneration,
    BertConfig,
    BertModel,
    BertTokenizerFast,
)

PRINTABLE = [chr(c) for c in range(33, 127)]

# twenty snippets covering identifiers that split into several subwords,
# literals, annotations, and every common statement shape
SNIPPETS = [
    "int x = 1;",
    "return x + y;",
    "public static int bubbleSort(int[] arr) { return 0; }",
    "if (count > 0) { total += count; }",
    "for (int i = 0; i < n; i++) { sum += i; }",
    "while (queue.isEmpty()) { wait(); }",
    "try { risky(); } catch (Exception e) { log.error(e); }",
    "String name = builder.toString();",
    "@Override public void run() { worker.start(); }",
    "switch (mode) { case 1: break; default: break; }",
    'logger.info("started");',
    'throw new IllegalStateException("bad state");',
    "synchronized (lock) { counter++; }",
    "double ratio = (double) hits / total;",
    "list.add(item); map.put(key, value);",
    "boolean ok = flag && !done;",
    "char sep = ';';",
    "this.value = value;",
    "return items.stream().filter(Objects::nonNull).count();",
    "continue;",
]


@pytest.fixture(scope="session")
def vocab_path(tmp_path_factory):
    # character-level WordPiece: every printable ASCII char as both a word
    # start and a continuation, so any code token tokenizes without [UNK]
    path = tmp_path_factory.mktemp("vocab") / "vocab.txt"
    entries = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    entries += PRINTABLE + ["##" + ch for ch in PRINTABLE]
    path.write_text("\n".join(entries) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def tokenizer(vocab_path):
    return BertTokenizerFast(str(vocab_path), do_lower_case=False)


@pytest.fixture(scope="session")
def encoder_model(tokenizer):
    config = BertConfig(
        vocab_size=tokenizer.vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
        attn_implementation="eager",
    )
    torch.manual_seed(7)
    model = BertModel(config)
    model.eval()
    return model


@pytest.fixture(scope="session")
def seq2seq_model(tokenizer):
    config = BartConfig(
        vocab_size=tokenizer.vocab_size,
        d_model=32,
        encoder_layers=2,
        decoder_layers=2,
        encoder_attention_heads=2,
        decoder_attention_heads=2,
        encoder_ffn_dim=64,
        decoder_ffn_dim=64,
        max_position_embeddings=512,
        pad_token_id=0,
        bos_token_id=2,
        eos_token_id=3,
        decoder_start_token_id=2,
        forced_eos_token_id=None,
        attn_implementation="eager",
    )
    torch.manual_seed(7)
    model = BartForConditionalGeneration(config)
    model.eval()
    return model


@pytest.fixture(scope="session")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "sample.jsonl"
    lines = [
        json.dumps({"id": f"s{i:02d}", "code": code}) for i, code in enumerate(SNIPPETS)
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
