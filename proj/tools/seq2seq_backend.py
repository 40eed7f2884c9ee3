#!/usr/bin/env python3
"""Sequence-to-sequence training backend for the morty CLI.

The C++ pipeline shells out to this script over small file contracts so
the core library never links an ML runtime:

  fit       --checkpoint-dir D --train train.jsonl --val val.jsonl ...
            trains a word-level GRU encoder-decoder with dot-product
            attention, writes D/model.pt and D/training_log.json
  generate  --checkpoint-dir D --input in.jsonl --output out.jsonl ...
            decodes predictions ({"paper_id", "prediction"} per line)
  probe     exits 0 iff the ML runtime imports
  selftest  runs internal assertions (early stopping) and exits 0/1

Dataset rows are JSON objects with "paper_id", "input_text" and (for
fit) "target_summary". Training minimizes teacher-forced cross-entropy;
validation loss drives early stopping with best-checkpoint restore.
"""

import argparse
import copy
import json
import math
import os
import random
import sys

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]


def read_jsonl(path):
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise SystemExit(f"{path}:{line_number}: invalid JSON: {exc}")
    return rows


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row) + "\n")


def build_vocab(rows):
    vocab = list(SPECIALS)
    seen = set(vocab)
    for row in rows:
        for field in ("input_text", "target_summary"):
            for token in row.get(field, "").split():
                if token not in seen:
                    seen.add(token)
                    vocab.append(token)
    return vocab


def encode(text, token_to_id):
    return [token_to_id.get(token, UNK) for token in text.split()]


class EarlyStopper:
    """Stops after `patience` epochs without validation-loss improvement.

    patience == 0 disables stopping; best_epoch always tracks the
    checkpoint to restore.
    """

    def __init__(self, patience):
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.bad_epochs = 0

    def update(self, epoch, loss):
        if loss < self.best:
            self.best = loss
            self.best_epoch = epoch
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return self.patience > 0 and self.bad_epochs >= self.patience


def make_model(vocab_size, embedding_size, hidden_size):
    import torch
    from torch import nn

    class Seq2Seq(nn.Module):
        def __init__(self):
            super().__init__()
            self.embedding = nn.Embedding(vocab_size, embedding_size, padding_idx=PAD)
            self.encoder = nn.GRU(embedding_size, hidden_size, batch_first=True)
            self.decoder = nn.GRU(embedding_size, hidden_size, batch_first=True)
            self.combine = nn.Linear(2 * hidden_size, hidden_size)
            self.out = nn.Linear(hidden_size, vocab_size)

        def encode(self, src):
            # src: (B, S) -> outputs (B, S, H), hidden (1, B, H)
            outputs, hidden = self.encoder(self.embedding(src))
            return outputs, hidden

        def attend(self, dec_out, enc_out, enc_mask):
            # dec_out (B, T, H) x enc_out (B, S, H) -> context (B, T, H).
            # Scores are scaled by 1/sqrt(H) so softmax stays unsaturated.
            scores = torch.bmm(dec_out, enc_out.transpose(1, 2))  # (B, T, S)
            scores = scores / math.sqrt(enc_out.size(-1))
            scores = scores.masked_fill(~enc_mask.unsqueeze(1), -1e9)
            weights = torch.softmax(scores, dim=-1)
            return torch.bmm(weights, enc_out)

        def decode(self, tgt_in, hidden, enc_out, enc_mask):
            # tgt_in: (B, T) decoder inputs -> logits (B, T, V), next hidden
            dec_out, hidden = self.decoder(self.embedding(tgt_in), hidden)
            context = self.attend(dec_out, enc_out, enc_mask)
            combined = torch.tanh(self.combine(torch.cat([dec_out, context], dim=-1)))
            return self.out(combined), hidden

        def forward(self, src, tgt_in):
            enc_out, hidden = self.encode(src)
            return self.decode(tgt_in, hidden, enc_out, src != PAD)[0]

    return Seq2Seq()


def pad_batch(sequences, torch):
    width = max(len(s) for s in sequences)
    return torch.tensor(
        [s + [PAD] * (width - len(s)) for s in sequences], dtype=torch.long
    )


def batch_loss(model, batch, torch):
    src = pad_batch([row["src"] for row in batch], torch)
    tgt_in = pad_batch([[BOS] + row["tgt"] for row in batch], torch)
    tgt_out = pad_batch([row["tgt"] + [EOS] for row in batch], torch)
    logits = model(src, tgt_in)
    return torch.nn.functional.cross_entropy(
        logits.reshape(-1, logits.size(-1)), tgt_out.reshape(-1), ignore_index=PAD
    )


def epoch_loss(model, rows, batch_size, torch):
    if not rows:
        return None
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(rows), batch_size):
            batch = rows[start : start + batch_size]
            total += batch_loss(model, batch, torch).item() * len(batch)
            count += len(batch)
    return total / count


def cmd_fit(args):
    import torch

    os.makedirs(args.checkpoint_dir, exist_ok=True)
    torch.manual_seed(args.seed)
    random.seed(args.seed)

    train_rows = read_jsonl(args.train)
    if not train_rows:
        raise SystemExit(f"{args.train}: training set is empty")
    val_rows = read_jsonl(args.val) if args.val else []

    vocab = build_vocab(train_rows)
    token_to_id = {token: i for i, token in enumerate(vocab)}

    def prepare(rows):
        return [
            {
                "src": encode(row["input_text"], token_to_id) or [UNK],
                "tgt": encode(row.get("target_summary", ""), token_to_id),
            }
            for row in rows
        ]

    train = prepare(train_rows)
    val = prepare(val_rows)

    model = make_model(len(vocab), args.embedding_size, args.hidden_size)
    optimizer = torch.optim.Adam(model.parameters(), lr=args.lr)
    stopper = EarlyStopper(args.patience)
    best_state = copy.deepcopy(model.state_dict())
    log = []

    for epoch in range(1, args.max_epochs + 1):
        order = list(range(len(train)))
        random.Random(args.seed + epoch).shuffle(order)
        model.train()
        total, count = 0.0, 0
        for start in range(0, len(order), args.batch_size):
            batch = [train[i] for i in order[start : start + args.batch_size]]
            optimizer.zero_grad()
            loss = batch_loss(model, batch, torch)
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), 1.0)
            optimizer.step()
            total += loss.item() * len(batch)
            count += len(batch)
        train_loss = total / count
        val_loss = epoch_loss(model, val, args.batch_size, torch)
        if val_loss is None:
            val_loss = train_loss
        log.append(
            {"epoch": epoch, "train_loss": train_loss, "validation_loss": val_loss}
        )
        stop = stopper.update(epoch, val_loss)
        if stopper.best_epoch == epoch:
            best_state = copy.deepcopy(model.state_dict())
        if stop:
            break

    model.load_state_dict(best_state)
    torch.save(
        {
            "state_dict": model.state_dict(),
            "vocab": vocab,
            "embedding_size": args.embedding_size,
            "hidden_size": args.hidden_size,
        },
        f"{args.checkpoint_dir}/model.pt",
    )
    with open(f"{args.checkpoint_dir}/training_log.json", "w", encoding="utf-8") as f:
        json.dump(log, f, indent=2)
    return 0


def beam_search(model, src_ids, beam_size, max_tokens, torch):
    src = torch.tensor([src_ids], dtype=torch.long)
    enc_out, hidden = model.encode(src)
    enc_mask = src != PAD
    # beams: (cumulative log-prob, token list, finished, hidden state)
    beams = [(0.0, [], False, hidden)]
    for _ in range(max_tokens):
        if all(finished for _, _, finished, _ in beams):
            break
        candidates = []
        for score, tokens, finished, state in beams:
            if finished:
                candidates.append((score, tokens, True, state))
                continue
            prev = tokens[-1] if tokens else BOS
            step = torch.tensor([[prev]], dtype=torch.long)
            logits, next_state = model.decode(step, state, enc_out, enc_mask)
            log_probs = torch.log_softmax(logits[0, -1], dim=-1)
            top = torch.topk(log_probs, beam_size)
            for log_prob, token in zip(top.values.tolist(), top.indices.tolist()):
                if token == EOS:
                    candidates.append((score + log_prob, tokens, True, next_state))
                else:
                    candidates.append((score + log_prob, tokens + [token], False, next_state))
        # Length-normalized ranking keeps short finished beams competitive.
        candidates.sort(key=lambda c: c[0] / max(1, len(c[1])), reverse=True)
        beams = candidates[:beam_size]
    return max(beams, key=lambda c: c[0] / max(1, len(c[1])))[1]


def cmd_generate(args):
    import torch

    checkpoint = torch.load(f"{args.checkpoint_dir}/model.pt", weights_only=False)
    vocab = checkpoint["vocab"]
    token_to_id = {token: i for i, token in enumerate(vocab)}
    model = make_model(len(vocab), checkpoint["embedding_size"], checkpoint["hidden_size"])
    model.load_state_dict(checkpoint["state_dict"])
    model.eval()

    outputs = []
    with torch.no_grad():
        for row in read_jsonl(args.input):
            src = encode(row["input_text"], token_to_id) or [UNK]
            ids = beam_search(model, src, args.beam_size, args.max_output_tokens, torch)
            tokens = [vocab[i] for i in ids if i not in (PAD, BOS, EOS, UNK)]
            outputs.append({"paper_id": row["paper_id"], "prediction": " ".join(tokens)})
    write_jsonl(args.output, outputs)
    return 0


def cmd_probe(_args):
    import torch

    print(torch.__version__)
    return 0


def cmd_selftest(_args):
    # Monotone improvement never stops.
    stopper = EarlyStopper(patience=2)
    assert not any(stopper.update(e, 10.0 - e) for e in range(1, 9))
    assert stopper.best_epoch == 8

    # Plateau of `patience` epochs stops, remembering the best epoch.
    stopper = EarlyStopper(patience=3)
    outcomes = [stopper.update(e, loss) for e, loss in enumerate([5, 4, 3, 3, 3, 3], 1)]
    assert outcomes == [False, False, False, False, False, True]
    assert stopper.best_epoch == 3

    # Patience 1 stops at the first non-improvement; patience 0 never stops.
    stopper = EarlyStopper(patience=1)
    assert [stopper.update(e, loss) for e, loss in enumerate([2.0, 2.0], 1)] == [False, True]
    stopper = EarlyStopper(patience=0)
    assert not any(stopper.update(e, 7.0) for e in range(1, 50))

    # An improvement after a bad epoch resets the counter.
    stopper = EarlyStopper(patience=2)
    losses = [5.0, 6.0, 4.0, 5.0, 4.5]
    assert [stopper.update(e, l) for e, l in enumerate(losses, 1)] == [
        False, False, False, False, True,
    ]
    assert stopper.best_epoch == 3

    print("selftest ok")
    return 0


def main(argv):
    parser = argparse.ArgumentParser(description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit")
    fit.add_argument("--checkpoint-dir", required=True)
    fit.add_argument("--train", required=True)
    fit.add_argument("--val", default="")
    fit.add_argument("--batch-size", type=int, default=2)
    fit.add_argument("--max-epochs", type=int, default=20)
    fit.add_argument("--patience", type=int, default=3)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--hidden-size", type=int, default=256)
    fit.add_argument("--embedding-size", type=int, default=128)
    fit.add_argument("--lr", type=float, default=3e-3)
    fit.set_defaults(run=cmd_fit)

    generate = sub.add_parser("generate")
    generate.add_argument("--checkpoint-dir", required=True)
    generate.add_argument("--input", required=True)
    generate.add_argument("--output", required=True)
    generate.add_argument("--beam-size", type=int, default=4)
    generate.add_argument("--max-output-tokens", type=int, default=512)
    generate.set_defaults(run=cmd_generate)

    sub.add_parser("probe").set_defaults(run=cmd_probe)
    sub.add_parser("selftest").set_defaults(run=cmd_selftest)

    args = parser.parse_args(argv)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
