"""Deliberately tiny bidirectional encoder for masked-LM sanity training.

The artifact validates the pipeline contract, not benchmark scores: two
encoder layers at width 128 by default.  Token embeddings may be initialized
from a transferred embedding file; the prediction head is always freshly
initialized (the transfer manifest records head: reinitialize).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn


@dataclass(frozen=True)
class ModelPreset:
    layers: int = 2
    width: int = 128
    heads: int = 4
    max_context: int = 256


TINY = ModelPreset()


class TinyMaskedLM(nn.Module):
    def __init__(self, vocab_size: int, preset: ModelPreset = TINY) -> None:
        super().__init__()
        self.preset = preset
        self.token_emb = nn.Embedding(vocab_size, preset.width)
        self.pos_emb = nn.Embedding(preset.max_context, preset.width)
        layer = nn.TransformerEncoderLayer(
            d_model=preset.width,
            nhead=preset.heads,
            dim_feedforward=4 * preset.width,
            batch_first=True,
            dropout=0.0,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=preset.layers)
        self.norm = nn.LayerNorm(preset.width)
        self.head = nn.Linear(preset.width, vocab_size)

    def forward(self, input_ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(input_ids.shape[1], device=input_ids.device)
        x = self.token_emb(input_ids) + self.pos_emb(positions)[None, :, :]
        x = self.encoder(x)
        return self.head(self.norm(x))

    def load_transferred_embeddings(self, rows: np.ndarray) -> None:
        """Copy a transferred embedding table into the token embeddings.

        The head keeps its fresh initialization: it is re-trained from
        scratch by design.
        """
        if rows.shape != tuple(self.token_emb.weight.shape):
            raise ValueError(
                f"embedding shape {rows.shape} does not match model "
                f"{tuple(self.token_emb.weight.shape)}"
            )
        with torch.no_grad():
            self.token_emb.weight.copy_(torch.from_numpy(rows.astype(np.float32)))
