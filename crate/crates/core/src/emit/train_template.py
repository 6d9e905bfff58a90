#!/usr/bin/env python3
"""Rebuild a featnet architecture from its IR, train it, write a metrics record.

Usage: <script> [--ir FILE] --dataset {mnist,cifar10} --epochs N --seed S [--subset K] --out FILE
       <script> [--ir FILE] --count-params
       <script> [--ir FILE] --build-only
"""
import argparse
import json
import os
import sys
import time

IR_TEXT = __IR_TEXT__
ARCH_ID = __ARCH_ID__
EXPECTED_PARAMS = __EXPECTED_PARAMS__
LEARNING_RATE = 0.01
MOMENTUM = 0.0
BATCH_SIZE = __BATCH_SIZE__
DEFAULT_EPOCHS = __EPOCHS__
DEFAULT_DATASET = __DATASET__
DEFAULT_SEED = __SEED__
DEFAULT_SUBSET = __SUBSET__
SCHEMA_VERSION = "featnet-ir/1"


class IrMismatch(Exception):
    pass


def count_params(ir):
    total = 0
    for node in ir["nodes"]:
        kind, a = node["kind"], node["attributes"]
        cin = node["in_shapes"][0][-1] if node["in_shapes"] else 0
        if kind == "convolution":
            total += a["filters"] * (a["kernel"] * a["kernel"] * cin + 1)
        elif kind == "dense":
            total += a["neurons"] * (cin + 1)
        elif kind == "classifier":
            total += a["classes"] * (cin + 1)
        elif kind == "batchnorm":
            total += 2 * cin
    return total


def build_model(ir):
    import keras
    from keras import layers, ops

    if ir.get("schema_version") != SCHEMA_VERSION:
        raise IrMismatch("unsupported schema version %r" % ir.get("schema_version"))
    tensors = {}
    for node in ir["nodes"]:
        kind, a = node["kind"], node["attributes"]
        xs = [tensors[i] for i in node["inputs"]]
        if kind == "input":
            t = keras.Input(shape=tuple(node["out_shape"]))
        elif kind == "zeros":
            t = layers.Lambda(lambda v: ops.zeros_like(v))(xs[0])
        elif kind in ("identity", "void"):
            t = xs[0]
        elif kind == "dense":
            t = layers.Dense(a["neurons"], activation=a["activation"])(xs[0])
        elif kind == "convolution":
            t = layers.Conv2D(
                a["filters"], a["kernel"], strides=a["stride"], padding=a["padding"], activation=a["activation"]
            )(xs[0])
        elif kind == "pooling":
            pool = layers.MaxPooling2D if a["pool"] == "max" else layers.AveragePooling2D
            t = pool(pool_size=a["kernel"], strides=a["stride"], padding=a["padding"])(xs[0])
        elif kind == "flatten":
            t = layers.Flatten()(xs[0])
        elif kind == "padding":
            t = layers.ZeroPadding2D(a["amount"])(xs[0])
        elif kind == "activation":
            t = layers.Activation(a["function"])(xs[0])
        elif kind == "dropout":
            t = layers.Dropout(a["rate"])(xs[0])
        elif kind == "batchnorm":
            t = layers.BatchNormalization()(xs[0])
        elif kind == "sum":
            t = layers.Add()(xs)
        elif kind == "concat":
            t = layers.Concatenate(axis=-1)(xs)
        elif kind == "product":
            if node["in_shapes"][0] == node["in_shapes"][1]:
                t = layers.Multiply()(xs)
            else:
                t = layers.Lambda(lambda p: ops.matmul(p[0], p[1]))(xs)
        elif kind == "classifier":
            t = layers.Dense(a["classes"], activation="softmax")(xs[0])
        else:
            raise IrMismatch("node %d: unknown kind %r" % (node["id"], kind))
        got = [int(d) for d in t.shape[1:]]
        if got != node["out_shape"]:
            raise IrMismatch("node %d (%s): shape %s, IR says %s" % (node["id"], kind, got, node["out_shape"]))
        tensors[node["id"]] = t
    model = keras.Model(tensors[ir["input"]], tensors[ir["classifier"]])
    size = sum(int(w.numpy().size) for w in model.trainable_weights)
    if size != ir["total_size"]:
        raise IrMismatch("framework counts %d trainable weights, IR says %d" % (size, ir["total_size"]))
    return model, size


def load_dataset(name, subset, seed):
    import keras
    import numpy as np

    source = {"mnist": keras.datasets.mnist, "cifar10": keras.datasets.cifar10}[name]
    (x_train, y_train), (x_test, y_test) = source.load_data()
    x_train = x_train.astype("float32") / 255.0
    x_test = x_test.astype("float32") / 255.0
    if x_train.ndim == 3:
        x_train = x_train[..., None]
        x_test = x_test[..., None]
    y_train = keras.utils.to_categorical(y_train.reshape(-1), 10)
    y_test = keras.utils.to_categorical(y_test.reshape(-1), 10)
    if subset:
        idx = np.random.default_rng(seed).permutation(len(x_train))[:subset]
        x_train, y_train = x_train[idx], y_train[idx]
    return x_train, y_train, x_test, y_test


def write_record(path, record):
    tmp = path + ".tmp"
    with open(tmp, "w") as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ir", help="IR file to use instead of the embedded one")
    p.add_argument("--dataset", choices=["mnist", "cifar10"], default=DEFAULT_DATASET)
    p.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--subset", type=int, default=DEFAULT_SUBSET)
    p.add_argument("--out")
    p.add_argument("--count-params", action="store_true", help="print the IR parameter total and exit")
    p.add_argument("--build-only", action="store_true", help="build the model, print its trainable weights, exit")
    args = p.parse_args(argv)

    arch_id = ARCH_ID
    if args.ir:
        with open(args.ir) as f:
            ir = json.load(f)
        arch_id = os.path.basename(args.ir).split(".ir.json")[0]
        expected = ir["total_size"]
    else:
        ir = json.loads(IR_TEXT)
        expected = EXPECTED_PARAMS
    if args.count_params:
        n = count_params(ir)
        print(n)
        return 0 if n == expected else 1
    if args.build_only:
        try:
            _, size = build_model(ir)
        except IrMismatch as e:
            print(e, file=sys.stderr)
            return 1
        print(size)
        return 0
    if not args.out:
        p.error("--out is required")
    if ir["dataset"]["name"] != args.dataset:
        p.error("IR was compiled for %s, not %s" % (ir["dataset"]["name"], args.dataset))

    record = {
        "arch_id": arch_id,
        "dataset": args.dataset,
        "epochs": args.epochs,
        "train_acc": [],
        "test_acc": [],
        "size": expected,
        "duration_s": 0.0,
        "seed": args.seed,
    }
    start = time.time()
    try:
        import keras

        keras.utils.set_random_seed(args.seed)
        model, record["size"] = build_model(ir)
        model.compile(
            optimizer=keras.optimizers.SGD(learning_rate=LEARNING_RATE, momentum=MOMENTUM),
            loss="categorical_crossentropy",
            metrics=["accuracy"],
        )
        x_train, y_train, x_test, y_test = load_dataset(args.dataset, args.subset, args.seed)
        for epoch in range(args.epochs):
            h = model.fit(x_train, y_train, batch_size=BATCH_SIZE, epochs=1, shuffle=True, verbose=0)
            record["train_acc"].append(float(h.history["accuracy"][-1]))
            record["test_acc"].append(float(model.evaluate(x_test, y_test, batch_size=BATCH_SIZE, verbose=0)[1]))
    except Exception as e:
        record["duration_s"] = time.time() - start
        record["error"] = "%s: %s" % (type(e).__name__, e)
        write_record(args.out, record)
        print(record["error"], file=sys.stderr)
        return 1
    record["duration_s"] = time.time() - start
    write_record(args.out, record)
    return 0


if __name__ == "__main__":
    sys.exit(main())
