#pragma once

// Minimal reverse-mode autodiff over a fixed operator set: conv2d (stride /
// padding / dilation), transposed conv2d (stride 2), 2x2 max pooling, k x k
// stride-1 min pooling, channel minimum, relu, brelu, channel concat,
// elementwise add and scalar affine. Nodes are appended in topological order;
// declared output shapes are checked while the graph is built.
//
// The executor is templated on the scalar type: the training path runs in
// float32, grad_check re-runs the same topology in a float64 shadow.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hazelab/nn/kernels.hpp"
#include "hazelab/rng.hpp"
#include "hazelab/tensor.hpp"

namespace hazelab::nn {

enum class OpKind {
    Input,
    Conv2d,
    ConvTranspose2d,
    MaxPool2,
    MinPool,
    ChannelMin,
    Relu,
    BRelu,
    Concat,
    Add,
    ScalarAffine,
};

const char* op_name(OpKind kind);

struct Shape4 {
    int n = 0, c = 0, h = 0, w = 0;
    bool operator==(const Shape4&) const = default;
    size_t numel() const { return size_t(n) * c * h * w; }
    std::string str() const;
};

struct Parameter {
    std::string name;
    Tensor4 value;
    Tensor4 grad;  // same shape as value
};

struct Node {
    OpKind kind = OpKind::Input;
    std::string label;
    std::vector<int> inputs;   // node ids
    int weight = -1, bias = -1;  // parameter indices
    kernels::ConvAttrs conv{};
    int pool_kernel = 0;       // MinPool
    float scale = 1.f, shift = 0.f;  // ScalarAffine
    Shape4 out{};
    std::string input_name;    // Input nodes
};

template <typename T>
struct Workspace {
    std::vector<std::vector<T>> acts;    // node activations (retained for backward)
    std::vector<std::vector<int>> aux;   // arg indices for pooling ops
    std::vector<std::vector<T>> gacts;   // node gradients
    std::vector<std::vector<T>> pvals;   // parameter values
    std::vector<std::vector<T>> pgrads;  // parameter gradients
    bool forward_done = false;
};

class Graph {
public:
    explicit Graph(std::string name) : name_(std::move(name)) {}

    int add_input(const std::string& input_name, Shape4 shape);
    // Same-padding requires dilation*(kernel-1) even (any odd kernel).
    int conv2d(int in, int out_channels, int kernel, int stride, int padding, int dilation,
               SplitMix64& rng, const std::string& label, float bias_init = 0.f);
    int conv2d_same(int in, int out_channels, int kernel, int dilation, SplitMix64& rng,
                    const std::string& label, float bias_init = 0.f);
    // Stride 2, even kernel, output doubles H and W.
    int conv_transpose2d(int in, int out_channels, int kernel, SplitMix64& rng,
                         const std::string& label);
    int maxpool2(int in);
    int minpool(int in, int kernel);
    int channel_min(int in);
    int relu(int in);
    int brelu(int in);
    int concat(const std::vector<int>& ins);
    int add(int a, int b);
    int scalar_affine(int in, float scale, float shift);
    void set_output(int node);

    // Deterministic evaluation in topological order; activations are retained
    // for backward. Shape mismatches name the offending node.
    Tensor4 forward(const std::map<std::string, Tensor4>& inputs);
    // Reverse-mode accumulation into Parameter::grad; returns input gradients
    // keyed by input name. Requires a prior forward on this instance.
    std::map<std::string, Tensor4> backward(const Tensor4& upstream);

    std::vector<Parameter>& params() { return params_; }
    const std::vector<Parameter>& params() const { return params_; }
    Parameter* find_param(const std::string& name);
    void zero_grads();

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::string& name() const { return name_; }
    int output_node() const { return output_; }
    Shape4 output_shape() const;
    std::vector<std::string> operator_list() const;

    // Used by grad_check to re-run the topology at float64.
    template <typename T>
    friend struct Executor;

private:
    int push(Node n);
    int add_param(const std::string& name, Tensor4 value);

    std::string name_;
    std::vector<Node> nodes_;
    std::vector<Parameter> params_;
    std::map<std::string, int> input_nodes_;
    int output_ = -1;
    Workspace<float> ws_;
};

// Analytic vs central finite differences on every parameter element and every
// input element (subsampled above `max_elements` per tensor), in float64.
struct GradCheckEntry {
    std::string name;  // parameter name or "input:<name>"
    double max_rel_err = 0.0;
    int checked = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;
};

GradCheckReport grad_check(const Graph& g, const std::map<std::string, Tensor4>& inputs,
                           uint64_t seed, int max_elements = 200, double h = 1e-3);

// p <- p - lr * g elementwise. lr must be > 0; a nonfinite gradient aborts the
// step (no parameter is touched) with a diagnostic naming the parameter.
void sgd_step(std::vector<Parameter>& params, float lr);

}  // namespace hazelab::nn
