#include "hazelab/nn/graph.hpp"

#include <algorithm>
#include <cmath>

#include "hazelab/error.hpp"

namespace hazelab::nn {

const char* op_name(OpKind kind) {
    switch (kind) {
        case OpKind::Input: return "input";
        case OpKind::Conv2d: return "conv2d";
        case OpKind::ConvTranspose2d: return "conv_transpose2d";
        case OpKind::MaxPool2: return "maxpool2";
        case OpKind::MinPool: return "minpool";
        case OpKind::ChannelMin: return "channel_min";
        case OpKind::Relu: return "relu";
        case OpKind::BRelu: return "brelu";
        case OpKind::Concat: return "concat";
        case OpKind::Add: return "add";
        case OpKind::ScalarAffine: return "scalar_affine";
    }
    return "?";
}

std::string Shape4::str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
           std::to_string(w) + ")";
}

int Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return int(nodes_.size()) - 1;
}

int Graph::add_param(const std::string& name, Tensor4 value) {
    for (const auto& p : params_)
        if (p.name == name) fail(ErrorCode::Usage, name_ + ": duplicate parameter " + name);
    Parameter p;
    p.name = name;
    p.grad = Tensor4(value.shape[0], value.shape[1], value.shape[2], value.shape[3]);
    p.value = std::move(value);
    params_.push_back(std::move(p));
    return int(params_.size()) - 1;
}

int Graph::add_input(const std::string& input_name, Shape4 shape) {
    if (input_nodes_.count(input_name))
        fail(ErrorCode::Usage, name_ + ": duplicate input " + input_name);
    Node n;
    n.kind = OpKind::Input;
    n.label = "input:" + input_name;
    n.input_name = input_name;
    n.out = shape;
    int id = push(std::move(n));
    input_nodes_[input_name] = id;
    return id;
}

namespace {

Tensor4 uniform_tensor(int d0, int d1, int d2, int d3, float scale, SplitMix64& rng) {
    Tensor4 t(d0, d1, d2, d3);
    for (float& v : t.data) v = rng.uniform_f(-scale, scale);
    return t;
}

}  // namespace

int Graph::conv2d(int in, int out_channels, int kernel, int stride, int padding, int dilation,
                  SplitMix64& rng, const std::string& label, float bias_init) {
    const Shape4 is = nodes_.at(size_t(in)).out;
    kernels::ConvAttrs a{kernel, stride, padding, dilation};
    Shape4 os{is.n, out_channels, kernels::conv_out_dim(is.h, a), kernels::conv_out_dim(is.w, a)};
    if (os.h <= 0 || os.w <= 0)
        fail(ErrorCode::Usage, name_ + "/" + label + ": conv2d output collapses to " + os.str());

    float s = std::sqrt(1.f / (float(is.c) * kernel * kernel));
    Node n;
    n.kind = OpKind::Conv2d;
    n.label = label;
    n.inputs = {in};
    n.conv = a;
    n.weight = add_param(label + ".weight", uniform_tensor(out_channels, is.c, kernel, kernel, s, rng));
    Tensor4 b(1, out_channels, 1, 1, bias_init);
    n.bias = add_param(label + ".bias", std::move(b));
    n.out = os;
    return push(std::move(n));
}

int Graph::conv2d_same(int in, int out_channels, int kernel, int dilation, SplitMix64& rng,
                       const std::string& label, float bias_init) {
    if ((dilation * (kernel - 1)) % 2 != 0)
        fail(ErrorCode::Usage, name_ + "/" + label + ": same padding needs dilation*(k-1) even");
    int pad = dilation * (kernel - 1) / 2;
    int id = conv2d(in, out_channels, kernel, 1, pad, dilation, rng, label, bias_init);
    const Shape4 is = nodes_[size_t(nodes_[size_t(id)].inputs[0])].out;
    if (nodes_[size_t(id)].out.h != is.h || nodes_[size_t(id)].out.w != is.w)
        fail(ErrorCode::Usage, name_ + "/" + label + ": same-padding shape check failed");
    return id;
}

int Graph::conv_transpose2d(int in, int out_channels, int kernel, SplitMix64& rng,
                            const std::string& label) {
    if (kernel < 2 || kernel % 2 != 0)
        fail(ErrorCode::Usage,
             name_ + "/" + label + ": transposed conv kernel must be even so the output doubles");
    const Shape4 is = nodes_.at(size_t(in)).out;
    float s = std::sqrt(1.f / (float(is.c) * kernel * kernel));
    Node n;
    n.kind = OpKind::ConvTranspose2d;
    n.label = label;
    n.inputs = {in};
    n.conv = kernels::ConvAttrs{kernel, 2, (kernel - 2) / 2, 1};
    n.weight = add_param(label + ".weight", uniform_tensor(is.c, out_channels, kernel, kernel, s, rng));
    n.bias = add_param(label + ".bias", Tensor4(1, out_channels, 1, 1, 0.f));
    n.out = Shape4{is.n, out_channels, is.h * 2, is.w * 2};
    return push(std::move(n));
}

int Graph::maxpool2(int in) {
    const Shape4 is = nodes_.at(size_t(in)).out;
    if (is.h % 2 != 0 || is.w % 2 != 0)
        fail(ErrorCode::Usage, name_ + ": maxpool2 needs even input dims, got " + is.str());
    Node n;
    n.kind = OpKind::MaxPool2;
    n.label = "maxpool2";
    n.inputs = {in};
    n.out = Shape4{is.n, is.c, is.h / 2, is.w / 2};
    return push(std::move(n));
}

int Graph::minpool(int in, int kernel) {
    if (kernel < 3 || kernel % 2 == 0)
        fail(ErrorCode::Usage, name_ + ": minpool kernel must be odd and >= 3");
    const Shape4 is = nodes_.at(size_t(in)).out;
    Node n;
    n.kind = OpKind::MinPool;
    n.label = "minpool" + std::to_string(kernel);
    n.inputs = {in};
    n.pool_kernel = kernel;
    n.out = is;
    return push(std::move(n));
}

int Graph::channel_min(int in) {
    const Shape4 is = nodes_.at(size_t(in)).out;
    Node n;
    n.kind = OpKind::ChannelMin;
    n.label = "channel_min";
    n.inputs = {in};
    n.out = Shape4{is.n, 1, is.h, is.w};
    return push(std::move(n));
}

int Graph::relu(int in) {
    Node n;
    n.kind = OpKind::Relu;
    n.label = "relu";
    n.inputs = {in};
    n.out = nodes_.at(size_t(in)).out;
    return push(std::move(n));
}

int Graph::brelu(int in) {
    Node n;
    n.kind = OpKind::BRelu;
    n.label = "brelu";
    n.inputs = {in};
    n.out = nodes_.at(size_t(in)).out;
    return push(std::move(n));
}

int Graph::concat(const std::vector<int>& ins) {
    if (ins.empty()) fail(ErrorCode::Usage, name_ + ": concat needs at least one input");
    Shape4 os = nodes_.at(size_t(ins[0])).out;
    for (size_t i = 1; i < ins.size(); ++i) {
        const Shape4 s = nodes_.at(size_t(ins[i])).out;
        if (s.n != os.n || s.h != os.h || s.w != os.w)
            fail(ErrorCode::Usage, name_ + ": concat spatial/batch mismatch " + os.str() +
                                       " vs " + s.str());
        os.c += s.c;
    }
    Node n;
    n.kind = OpKind::Concat;
    n.label = "concat";
    n.inputs = ins;
    n.out = os;
    return push(std::move(n));
}

int Graph::add(int a, int b) {
    const Shape4 sa = nodes_.at(size_t(a)).out, sb = nodes_.at(size_t(b)).out;
    if (!(sa == sb))
        fail(ErrorCode::Usage, name_ + ": add shape mismatch " + sa.str() + " vs " + sb.str());
    Node n;
    n.kind = OpKind::Add;
    n.label = "add";
    n.inputs = {a, b};
    n.out = sa;
    return push(std::move(n));
}

int Graph::scalar_affine(int in, float scale, float shift) {
    Node n;
    n.kind = OpKind::ScalarAffine;
    n.label = "scalar_affine";
    n.inputs = {in};
    n.scale = scale;
    n.shift = shift;
    n.out = nodes_.at(size_t(in)).out;
    return push(std::move(n));
}

void Graph::set_output(int node) {
    if (node < 0 || node >= int(nodes_.size()))
        fail(ErrorCode::Usage, name_ + ": output node out of range");
    output_ = node;
}

Shape4 Graph::output_shape() const {
    if (output_ < 0) fail(ErrorCode::Usage, name_ + ": output not set");
    return nodes_[size_t(output_)].out;
}

Parameter* Graph::find_param(const std::string& name) {
    for (auto& p : params_)
        if (p.name == name) return &p;
    return nullptr;
}

void Graph::zero_grads() {
    for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.f);
}

std::vector<std::string> Graph::operator_list() const {
    std::vector<std::string> ops;
    for (const auto& n : nodes_) ops.push_back(op_name(n.kind));
    return ops;
}

// ---------------------------------------------------------------------------
// Templated executor: runs the topology of a Graph at scalar type T.

template <typename T>
struct Executor {
    const Graph& g;
    Workspace<T>& ws;

    void load_params() {
        ws.pvals.resize(g.params_.size());
        ws.pgrads.resize(g.params_.size());
        for (size_t i = 0; i < g.params_.size(); ++i) {
            const auto& src = g.params_[i].value.data;
            ws.pvals[i].assign(src.begin(), src.end());
            ws.pgrads[i].assign(src.size(), T(0));
        }
    }

    void forward(const std::map<std::string, std::vector<T>>& inputs) {
        const auto& nodes = g.nodes_;
        ws.acts.resize(nodes.size());
        ws.aux.resize(nodes.size());
        for (size_t id = 0; id < nodes.size(); ++id) {
            const Node& n = nodes[id];
            const Shape4 os = n.out;
            ws.acts[id].assign(os.numel(), T(0));
            T* out = ws.acts[id].data();
            switch (n.kind) {
                case OpKind::Input: {
                    auto it = inputs.find(n.input_name);
                    if (it == inputs.end())
                        fail(ErrorCode::Usage, g.name_ + ": missing input " + n.input_name);
                    if (it->second.size() != os.numel())
                        fail(ErrorCode::Data, g.name_ + "/" + n.label + ": input size " +
                                                  std::to_string(it->second.size()) +
                                                  " does not match declared " + os.str());
                    std::copy(it->second.begin(), it->second.end(), ws.acts[id].begin());
                    break;
                }
                case OpKind::Conv2d: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    kernels::conv2d_forward(ws.acts[size_t(n.inputs[0])].data(), is.n, is.c,
                                            is.h, is.w, ws.pvals[size_t(n.weight)].data(),
                                            ws.pvals[size_t(n.bias)].data(), os.c, n.conv, out,
                                            os.h, os.w);
                    break;
                }
                case OpKind::ConvTranspose2d: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    kernels::conv_transpose2d_forward(
                        ws.acts[size_t(n.inputs[0])].data(), is.n, is.c, is.h, is.w,
                        ws.pvals[size_t(n.weight)].data(), ws.pvals[size_t(n.bias)].data(),
                        os.c, n.conv.kernel, out, os.h, os.w);
                    break;
                }
                case OpKind::MaxPool2: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    ws.aux[id].assign(os.numel(), 0);
                    kernels::maxpool2_forward(ws.acts[size_t(n.inputs[0])].data(), is.n, is.c,
                                              is.h, is.w, out, ws.aux[id].data());
                    break;
                }
                case OpKind::MinPool: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    ws.aux[id].assign(os.numel(), 0);
                    kernels::minpool_forward(ws.acts[size_t(n.inputs[0])].data(), is.n, is.c,
                                             is.h, is.w, n.pool_kernel, out, ws.aux[id].data());
                    break;
                }
                case OpKind::ChannelMin: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    ws.aux[id].assign(os.numel(), 0);
                    kernels::channel_min_forward(ws.acts[size_t(n.inputs[0])].data(), is.n, is.c,
                                                 is.h, is.w, out, ws.aux[id].data());
                    break;
                }
                case OpKind::Relu:
                    kernels::relu_forward(ws.acts[size_t(n.inputs[0])].data(), os.numel(), out);
                    break;
                case OpKind::BRelu:
                    kernels::brelu_forward(ws.acts[size_t(n.inputs[0])].data(), os.numel(), out);
                    break;
                case OpKind::Concat: {
                    size_t plane = size_t(os.h) * os.w;
                    for (int nn = 0; nn < os.n; ++nn) {
                        size_t coff = 0;
                        for (int src : n.inputs) {
                            const Shape4 is = nodes[size_t(src)].out;
                            const T* sp = ws.acts[size_t(src)].data() +
                                          size_t(nn) * is.c * plane;
                            std::copy(sp, sp + size_t(is.c) * plane,
                                      out + (size_t(nn) * os.c + coff) * plane);
                            coff += size_t(is.c);
                        }
                    }
                    break;
                }
                case OpKind::Add: {
                    const T* a = ws.acts[size_t(n.inputs[0])].data();
                    const T* b = ws.acts[size_t(n.inputs[1])].data();
                    for (size_t i = 0; i < os.numel(); ++i) out[i] = a[i] + b[i];
                    break;
                }
                case OpKind::ScalarAffine: {
                    const T* a = ws.acts[size_t(n.inputs[0])].data();
                    for (size_t i = 0; i < os.numel(); ++i)
                        out[i] = T(n.scale) * a[i] + T(n.shift);
                    break;
                }
            }
        }
        ws.forward_done = true;
    }

    void backward(const std::vector<T>& upstream) {
        if (!ws.forward_done)
            fail(ErrorCode::Usage, g.name_ + ": backward called before forward");
        if (g.output_ < 0) fail(ErrorCode::Usage, g.name_ + ": output not set");
        const auto& nodes = g.nodes_;
        ws.gacts.resize(nodes.size());
        for (size_t id = 0; id < nodes.size(); ++id)
            ws.gacts[id].assign(nodes[id].out.numel(), T(0));
        for (auto& pg : ws.pgrads) std::fill(pg.begin(), pg.end(), T(0));
        if (upstream.size() != nodes[size_t(g.output_)].out.numel())
            fail(ErrorCode::Data, g.name_ + ": upstream size mismatch");
        ws.gacts[size_t(g.output_)] = upstream;

        for (int id = int(nodes.size()) - 1; id >= 0; --id) {
            const Node& n = nodes[size_t(id)];
            const T* up = ws.gacts[size_t(id)].data();
            const Shape4 os = n.out;
            switch (n.kind) {
                case OpKind::Input:
                    break;
                case OpKind::Conv2d: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    kernels::conv2d_backward_input(up, os.n, os.c, os.h, os.w,
                                                   ws.pvals[size_t(n.weight)].data(), is.c,
                                                   n.conv,
                                                   ws.gacts[size_t(n.inputs[0])].data(), is.h,
                                                   is.w);
                    kernels::conv2d_backward_params(up, ws.acts[size_t(n.inputs[0])].data(),
                                                    is.n, is.c, is.h, is.w, os.c, n.conv, os.h,
                                                    os.w, ws.pgrads[size_t(n.weight)].data(),
                                                    ws.pgrads[size_t(n.bias)].data());
                    break;
                }
                case OpKind::ConvTranspose2d: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    kernels::conv_transpose2d_backward_input(
                        up, os.n, os.c, os.h, os.w, ws.pvals[size_t(n.weight)].data(), is.c,
                        n.conv.kernel, ws.gacts[size_t(n.inputs[0])].data(), is.h, is.w);
                    kernels::conv_transpose2d_backward_params(
                        up, ws.acts[size_t(n.inputs[0])].data(), is.n, is.c, is.h, is.w, os.c,
                        n.conv.kernel, os.h, os.w, ws.pgrads[size_t(n.weight)].data(),
                        ws.pgrads[size_t(n.bias)].data());
                    break;
                }
                case OpKind::MaxPool2: {
                    kernels::maxpool2_backward(up, ws.aux[size_t(id)].data(), os.n, os.c, os.h,
                                               os.w, ws.gacts[size_t(n.inputs[0])].data());
                    break;
                }
                case OpKind::MinPool: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    kernels::minpool_backward(up, ws.aux[size_t(id)].data(), is.n, is.c, is.h,
                                              is.w, n.pool_kernel,
                                              ws.gacts[size_t(n.inputs[0])].data());
                    break;
                }
                case OpKind::ChannelMin: {
                    const Shape4 is = nodes[size_t(n.inputs[0])].out;
                    kernels::channel_min_backward(up, ws.aux[size_t(id)].data(), is.n, is.c,
                                                  is.h, is.w,
                                                  ws.gacts[size_t(n.inputs[0])].data());
                    break;
                }
                case OpKind::Relu:
                    kernels::relu_backward(up, ws.acts[size_t(n.inputs[0])].data(), os.numel(),
                                           ws.gacts[size_t(n.inputs[0])].data());
                    break;
                case OpKind::BRelu:
                    kernels::brelu_backward(up, ws.acts[size_t(n.inputs[0])].data(), os.numel(),
                                            ws.gacts[size_t(n.inputs[0])].data());
                    break;
                case OpKind::Concat: {
                    size_t plane = size_t(os.h) * os.w;
                    for (int nn = 0; nn < os.n; ++nn) {
                        size_t coff = 0;
                        for (int src : n.inputs) {
                            const Shape4 is = nodes[size_t(src)].out;
                            T* dst = ws.gacts[size_t(src)].data() + size_t(nn) * is.c * plane;
                            const T* sp = up + (size_t(nn) * os.c + coff) * plane;
                            for (size_t i = 0; i < size_t(is.c) * plane; ++i) dst[i] += sp[i];
                            coff += size_t(is.c);
                        }
                    }
                    break;
                }
                case OpKind::Add: {
                    for (int src : n.inputs) {
                        T* dst = ws.gacts[size_t(src)].data();
                        for (size_t i = 0; i < os.numel(); ++i) dst[i] += up[i];
                    }
                    break;
                }
                case OpKind::ScalarAffine: {
                    T* dst = ws.gacts[size_t(n.inputs[0])].data();
                    for (size_t i = 0; i < os.numel(); ++i) dst[i] += T(n.scale) * up[i];
                    break;
                }
            }
        }
    }
};

template struct Executor<float>;
template struct Executor<double>;

Tensor4 Graph::forward(const std::map<std::string, Tensor4>& inputs) {
    std::map<std::string, std::vector<float>> bufs;
    for (const auto& [name, id] : input_nodes_) {
        auto it = inputs.find(name);
        if (it == inputs.end()) fail(ErrorCode::Usage, name_ + ": missing input " + name);
        const Shape4 want = nodes_[size_t(id)].out;
        const auto& got = it->second.shape;
        if (got[0] != want.n || got[1] != want.c || got[2] != want.h || got[3] != want.w)
            fail(ErrorCode::Data, name_ + "/input:" + name + ": shape mismatch, declared " +
                                      want.str());
        bufs[name] = it->second.data;
    }
    Executor<float> ex{*this, ws_};
    ex.load_params();
    ex.forward(bufs);
    const Shape4 os = output_shape();
    Tensor4 out(os.n, os.c, os.h, os.w);
    out.data = ws_.acts[size_t(output_)];
    return out;
}

std::map<std::string, Tensor4> Graph::backward(const Tensor4& upstream) {
    Executor<float> ex{*this, ws_};
    ex.backward(upstream.data);
    for (size_t i = 0; i < params_.size(); ++i)
        params_[i].grad.data.assign(ws_.pgrads[i].begin(), ws_.pgrads[i].end());
    std::map<std::string, Tensor4> input_grads;
    for (const auto& [name, id] : input_nodes_) {
        const Shape4 s = nodes_[size_t(id)].out;
        Tensor4 t(s.n, s.c, s.h, s.w);
        t.data.assign(ws_.gacts[size_t(id)].begin(), ws_.gacts[size_t(id)].end());
        input_grads[name] = std::move(t);
    }
    return input_grads;
}

GradCheckReport grad_check(const Graph& g, const std::map<std::string, Tensor4>& inputs,
                           uint64_t seed, int max_elements, double h) {
    Workspace<double> ws;
    Executor<double> ex{g, ws};
    ex.load_params();

    std::map<std::string, std::vector<double>> bufs;
    for (const auto& [name, t] : inputs) bufs[name] = std::vector<double>(t.data.begin(), t.data.end());

    SplitMix64 rng(seed);
    ex.forward(bufs);
    const size_t out_count = ws.acts[size_t(g.output_node())].size();
    std::vector<double> proj(out_count);
    for (double& v : proj) v = rng.uniform(-1.0, 1.0);
    ex.backward(proj);

    // Snapshot analytic gradients before finite-difference re-runs clobber
    // the workspace.
    std::vector<std::vector<double>> analytic_p = ws.pgrads;
    std::map<std::string, std::vector<double>> analytic_in;
    for (const auto& n : g.nodes())
        if (n.kind == OpKind::Input) {
            int id = int(&n - g.nodes().data());
            analytic_in[n.input_name] = ws.gacts[size_t(id)];
        }

    auto eval = [&]() {
        ex.forward(bufs);
        const auto& out = ws.acts[size_t(g.output_node())];
        double s = 0.0;
        for (size_t i = 0; i < out.size(); ++i) s += out[i] * proj[i];
        return s;
    };
    auto rel_err = [](double a, double f) {
        double denom = std::max({std::fabs(a), std::fabs(f), 1e-6});
        return std::fabs(a - f) / denom;
    };

    GradCheckReport report;
    auto probe = [&](const std::string& name, std::vector<double>& values,
                     const std::vector<double>& analytic) {
        GradCheckEntry entry;
        entry.name = name;
        size_t count = values.size();
        std::vector<size_t> idx;
        if (int(count) <= max_elements) {
            idx.resize(count);
            for (size_t i = 0; i < count; ++i) idx[i] = i;
        } else {
            idx.resize(size_t(max_elements));
            for (auto& i : idx) i = size_t(rng.next_below(count));
        }
        for (size_t i : idx) {
            double saved = values[i];
            values[i] = saved + h;
            double lp = eval();
            values[i] = saved - h;
            double lm = eval();
            values[i] = saved;
            double fd = (lp - lm) / (2.0 * h);
            entry.max_rel_err = std::max(entry.max_rel_err, rel_err(analytic[i], fd));
            ++entry.checked;
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    };

    for (size_t p = 0; p < g.params().size(); ++p)
        probe(g.params()[p].name, ws.pvals[p], analytic_p[p]);
    for (auto& [name, buf] : bufs) probe("input:" + name, buf, analytic_in[name]);
    return report;
}

void sgd_step(std::vector<Parameter>& params, float lr) {
    if (!(lr > 0.f)) fail(ErrorCode::Usage, "sgd_step: learning rate must be > 0");
    for (const auto& p : params)
        for (float gv : p.grad.data)
            if (!std::isfinite(gv))
                fail(ErrorCode::Numeric, "sgd_step: nonfinite gradient in " + p.name +
                                             "; step aborted");
    for (auto& p : params)
        for (size_t i = 0; i < p.value.data.size(); ++i)
            p.value.data[i] -= lr * p.grad.data[i];
}

}  // namespace hazelab::nn
