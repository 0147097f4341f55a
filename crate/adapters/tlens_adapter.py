#!/usr/bin/env python3
"""TransformerLens adapter: drives a real model over the JSON-lines protocol.

Usage:
    python adapters/tlens_adapter.py [model_name]

`model_name` is any model TransformerLens can load (default "gpt2");
set TLENS_DEVICE to pick a device ("cuda", "cpu", ...). Requires the
`transformer_lens` and `torch` packages, which are deliberately not
dependencies of the Rust side; install them in whatever environment
runs this script.

Layer convention: layer 0 is the residual stream entering block 0 (the
embeddings), layer l (1 <= l <= n_blocks) is the stream after block
l-1. The descriptor therefore reports n_blocks + 1 layers. Activations
are read at the final prompt position.

Injection adds the vector (scaled by sign and coefficient) to the
residual stream entering the corresponding block on every forward pass.
With scope "generated_only" the addition is skipped on the first
(prompt-encoding) pass and applied to the incremental passes that emit
new tokens; with "all_positions" it also shifts the prompt encoding.
"""

import json
import os
import sys


def main():
    import torch
    from transformer_lens import HookedTransformer

    model_name = sys.argv[1] if len(sys.argv) > 1 else "gpt2"
    device = os.environ.get("TLENS_DEVICE", "cuda" if torch.cuda.is_available() else "cpu")
    model = HookedTransformer.from_pretrained(model_name, device=device)
    model.eval()
    torch.set_grad_enabled(False)

    n_blocks = model.cfg.n_layers
    n_layers = n_blocks + 1
    hidden_dim = model.cfg.d_model

    def hook_name(layer):
        if layer == 0:
            return "blocks.0.hook_resid_pre"
        return "blocks.%d.hook_resid_post" % (layer - 1)

    def generate(prompt, params, fwd_hooks=()):
        torch.manual_seed(int(params.get("seed", 0)))
        temperature = float(params.get("temperature", 0.0))
        kwargs = {
            "max_new_tokens": int(params.get("max_new_tokens", 64)),
            "return_type": "str",
            "verbose": False,
        }
        if temperature <= 0.0:
            kwargs["do_sample"] = False
        else:
            kwargs["do_sample"] = True
            kwargs["temperature"] = temperature
        with model.hooks(fwd_hooks=list(fwd_hooks)):
            text = model.generate(prompt, **kwargs)
        # HookedTransformer.generate returns prompt + completion.
        return text[len(prompt):] if text.startswith(prompt) else text

    def capture(prompt, layers):
        for layer in layers:
            if layer >= n_layers:
                raise ValueError("layer %d out of range (%d layers)" % (layer, n_layers))
        names = {hook_name(layer) for layer in layers}
        _, cache = model.run_with_cache(
            prompt, names_filter=lambda name: name in names
        )
        rows = []
        for layer in layers:
            resid = cache[hook_name(layer)]
            rows.append([float(v) for v in resid[0, -1, :].tolist()])
        return rows

    def injection_hooks(spec, prompt_len):
        sign = 1.0 if spec["sign"] == "plus" else -1.0
        shift = sign * float(spec.get("coefficient", 1.0)) * torch.tensor(
            spec["vector"], dtype=torch.float32, device=device
        )
        generated_only = spec.get("scope") == "generated_only"

        def hook(resid, hook):
            if generated_only and resid.shape[1] >= prompt_len:
                # First pass encodes the whole prompt; leave it alone.
                return resid
            return resid + shift

        return [(hook_name(spec["layer"]), hook)]

    def generate_injected(prompt, params, spec):
        prompt_len = model.to_tokens(prompt).shape[1]
        return generate(prompt, params, fwd_hooks=injection_hooks(spec, prompt_len))

    def attention(prompt, response, kind):
        if kind == "self":
            text = prompt
        else:
            text = prompt + response
        names = {"blocks.%d.attn.hook_pattern" % b for b in range(n_blocks)}
        tokens = model.to_tokens(text)
        _, cache = model.run_with_cache(
            tokens, names_filter=lambda name: name in names
        )
        str_tokens = model.to_str_tokens(text)
        prompt_count = model.to_tokens(prompt).shape[1]
        maps = []
        for b in range(n_blocks):
            # [head, query, key] -> max over heads.
            pattern = cache["blocks.%d.attn.hook_pattern" % b][0].max(dim=0).values
            if kind == "self":
                weights = pattern
                query_tokens = str_tokens
            else:
                weights = pattern[prompt_count:, :prompt_count]
                query_tokens = str_tokens[prompt_count:]
            maps.append({
                "kind": kind,
                "layer": b,
                "weights": [[float(v) for v in row] for row in weights.tolist()],
                "query_tokens": query_tokens,
                "key_tokens": str_tokens[:prompt_count] if kind == "cross" else str_tokens,
            })
        return maps

    def handle(request):
        op = request.get("op")
        if op == "describe":
            return {
                "name": model_name,
                "n_layers": n_layers,
                "hidden_dim": hidden_dim,
                "deterministic": True,
            }
        if op == "generate":
            return {"text": generate(request["prompt"], request["params"])}
        if op == "capture":
            return {"rows": capture(request["prompt"], request["layers"])}
        if op == "generate_injected":
            return {
                "text": generate_injected(
                    request["prompt"], request["params"], request["spec"]
                )
            }
        if op == "attention":
            return {
                "maps": attention(
                    request["prompt"], request["response"], request["kind"]
                )
            }
        if op == "shutdown":
            return None
        return {"error": "unknown op %r" % op}

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            reply = handle(json.loads(line))
        except Exception as e:
            reply = {"error": "%s: %s" % (type(e).__name__, e)}
        if reply is None:
            break
        print(json.dumps(reply), flush=True)


if __name__ == "__main__":
    main()
