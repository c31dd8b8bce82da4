"""Fixtures: build currikit plans through the CLI, never through imports.

The trainer's contract is the file formats; these fixtures exercise exactly
that boundary by shelling out to the currikit command line.
"""

import subprocess
import sys
from pathlib import Path

import pytest


def make_learnable_corpus(words: int, seed: int) -> str:
    """Zipf-ish word soup with strong bigram structure, ~`words` words."""
    state = seed & 0xFFFFFFFFFFFFFFFF

    def rand(n):
        nonlocal state
        state = (state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return (z ^ (z >> 31)) % n

    nouns = ["sun", "moon", "tree", "bird", "fish", "stone", "wave", "cloud"]
    verbs = ["rises", "falls", "sings", "swims", "waits", "turns"]
    lines = []
    count = 0
    while count < words:
        sentence = []
        for _ in range(2 + rand(4)):
            noun = nouns[rand(len(nouns))]
            verb = verbs[rand(len(verbs))]  # bigram structure: noun then verb
            sentence += ["the", noun, verb, "and"]
        sentence = sentence[:-1]
        lines.append(" ".join(sentence) + ".")
        count += len(sentence)
    return "\n".join(lines) + "\n"


def run_currikit(*args: str) -> None:
    result = subprocess.run(
        [sys.executable, "-m", "currikit.cli", *args],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, f"currikit {args[0]} failed: {result.stderr}"


def write_toy_config(path: Path, mode: str, out_dir: Path) -> None:
    path.write_text(
        f"""
[pipeline]
context_stages = [32, 128]
stage_epochs = [1, 1]
ordering_mode = "{mode}"
phase_fractions = ["1/3", "2/3", "1"]
vocab_target = 512
seed = 5
output_dir = "{out_dir}"

[hyperparameters]
learning_rate = 1e-3
decay = 0.01
warmup_steps = 10000
optimizer = "AdamW"
batch_size = 32
epochs = 50
masking_rate = 0.15
""",
        encoding="utf-8",
    )


@pytest.fixture(scope="session")
def toy_plans(tmp_path_factory):
    """Plans for the curriculum/none/reversed triple over a 100k-token corpus."""
    tmp = tmp_path_factory.mktemp("toy-plans")
    corpus = tmp / "corpus.txt"
    corpus.write_text(make_learnable_corpus(100_000, seed=12), encoding="utf-8")
    manifests = {}
    for mode in ("curriculum", "none", "reversed"):
        out = tmp / f"plan-{mode}"
        config = tmp / f"config-{mode}.toml"
        write_toy_config(config, mode, out)
        run_currikit("plan", "--config", str(config), "--corpus", str(corpus))
        manifests[mode] = out / "manifest.json"
    return manifests
