#include "tsnl/nde/made.hpp"

namespace tsnl {

MaskSet build_masks(int D, int d_c, const std::vector<int>& hidden_sizes,
                    Rng& rng) {
  (void)rng;
  MaskSet ms;
  ms.input_degrees.resize(D);
  for (int j = 0; j < D; ++j) ms.input_degrees[j] = j + 1;

  std::vector<int> prev_deg = ms.input_degrees;
  bool first = true;
  for (int H : hidden_sizes) {
    std::vector<int> deg(H);
    for (int i = 0; i < H; ++i) {
      deg[i] = static_cast<int>((static_cast<long long>(i) * D) / H);
    }
    const int prev_width = first ? D + d_c : static_cast<int>(prev_deg.size());
    Matrix mask = Matrix::Zero(H, prev_width);
    for (int i = 0; i < H; ++i) {
      if (first) {
        for (int j = 0; j < D; ++j) {
          if (deg[i] >= ms.input_degrees[j]) mask(i, j) = 1.0;
        }
        for (int j = D; j < D + d_c; ++j) mask(i, j) = 1.0;  // context: degree 0
      } else {
        for (int j = 0; j < prev_width; ++j) {
          if (deg[i] >= prev_deg[j]) mask(i, j) = 1.0;
        }
      }
    }
    ms.masks.push_back(std::move(mask));
    ms.hidden_degrees.push_back(deg);
    prev_deg = ms.hidden_degrees.back();
    first = false;
  }

  const int H_last = static_cast<int>(prev_deg.size());
  ms.out_mask = Matrix::Zero(D, H_last);
  for (int d = 0; d < D; ++d) {
    for (int i = 0; i < H_last; ++i) {
      if (prev_deg[i] < d + 1) ms.out_mask(d, i) = 1.0;
    }
  }
  return ms;
}

MadeLayer::MadeLayer(int event_dim, int context_dim,
                     const std::vector<int>& hidden_sizes, Activation activation,
                     Rng& rng)
    : D(event_dim), dc(context_dim), act(activation) {
  masks = build_masks(D, dc, hidden_sizes, rng);
  int in = D + dc;
  for (std::size_t m = 0; m < hidden_sizes.size(); ++m) {
    const int H = hidden_sizes[m];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> unif(-bound, bound);
    Matrix w(H, in);
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < in; ++j) w(i, j) = unif(rng);
    }
    W.push_back(w.cwiseProduct(masks.masks[m]));
    b.push_back(Vector::Zero(H));
    in = H;
  }
  Vmu = Matrix::Zero(D, in);
  Valpha = Matrix::Zero(D, in);
  cmu = Vector::Zero(D);
  calpha = Vector::Zero(D);
}

namespace {

inline Matrix apply_act(const Matrix& a, Activation act) {
  if (act == Activation::Tanh) return a.array().tanh();
  return a.cwiseMax(0.0);
}

inline Matrix act_grad(const Matrix& h, Activation act) {
  if (act == Activation::Tanh) return (1.0 - h.array().square()).matrix();
  return (h.array() > 0.0).cast<double>().matrix();
}

}  // namespace

void MadeLayer::forward(const Matrix& events, const Matrix& contexts, Matrix& mu,
                        Matrix& alpha, Cache* cache) const {
  const Eigen::Index n = events.rows();
  Matrix x(n, D + dc);
  x.leftCols(D) = events;
  if (dc > 0) x.rightCols(dc) = contexts;
  if (cache) {
    cache->input = x;
    cache->h.clear();
  }
  Matrix h = x;
  for (std::size_t m = 0; m < W.size(); ++m) {
    const Matrix w = W[m].cwiseProduct(masks.masks[m]);
    h = apply_act((h * w.transpose()).rowwise() + b[m].transpose(), act);
    if (cache) cache->h.push_back(h);
  }
  mu = (h * Vmu.cwiseProduct(masks.out_mask).transpose()).rowwise() +
       cmu.transpose();
  alpha = (h * Valpha.cwiseProduct(masks.out_mask).transpose()).rowwise() +
          calpha.transpose();
  if (cache) {
    cache->mu = mu;
    cache->alpha = alpha;
  }
}

MadeLayer::Grads::Grads(const MadeLayer& layer) {
  for (std::size_t m = 0; m < layer.W.size(); ++m) {
    dW.push_back(Matrix::Zero(layer.W[m].rows(), layer.W[m].cols()));
    db.push_back(Vector::Zero(layer.b[m].size()));
  }
  dVmu = Matrix::Zero(layer.Vmu.rows(), layer.Vmu.cols());
  dValpha = Matrix::Zero(layer.Valpha.rows(), layer.Valpha.cols());
  dcmu = Vector::Zero(layer.cmu.size());
  dcalpha = Vector::Zero(layer.calpha.size());
}

Matrix MadeLayer::backward(const Cache& cache, const Matrix& dmu,
                           const Matrix& dalpha, Grads& grads) const {
  const Matrix& h_last = cache.h.back();
  grads.dVmu += (dmu.transpose() * h_last).cwiseProduct(masks.out_mask);
  grads.dValpha += (dalpha.transpose() * h_last).cwiseProduct(masks.out_mask);
  grads.dcmu += dmu.colwise().sum().transpose();
  grads.dcalpha += dalpha.colwise().sum().transpose();

  Matrix dh = dmu * Vmu.cwiseProduct(masks.out_mask) +
              dalpha * Valpha.cwiseProduct(masks.out_mask);
  for (int m = static_cast<int>(W.size()) - 1; m >= 0; --m) {
    const Matrix da = dh.cwiseProduct(act_grad(cache.h[m], act));
    const Matrix& below = m == 0 ? cache.input : cache.h[m - 1];
    grads.dW[m] += (da.transpose() * below).cwiseProduct(masks.masks[m]);
    grads.db[m] += da.colwise().sum().transpose();
    dh = da * W[m].cwiseProduct(masks.masks[m]);
  }
  return dh.leftCols(D);
}

int MadeLayer::n_params() const {
  int n = 0;
  for (std::size_t m = 0; m < W.size(); ++m) {
    n += static_cast<int>(W[m].size() + b[m].size());
  }
  n += static_cast<int>(Vmu.size() + cmu.size() + Valpha.size() + calpha.size());
  return n;
}

namespace {

void put(Vector& flat, int& off, const Matrix& m) {
  Eigen::Map<Vector>(flat.data() + off, m.size()) =
      Eigen::Map<const Vector>(m.data(), m.size());
  off += static_cast<int>(m.size());
}

void get(const Vector& flat, int& off, Matrix& m) {
  Eigen::Map<Vector>(m.data(), m.size()) =
      Eigen::Map<const Vector>(flat.data() + off, m.size());
  off += static_cast<int>(m.size());
}

void put(Vector& flat, int& off, const Vector& v) {
  flat.segment(off, v.size()) = v;
  off += static_cast<int>(v.size());
}

void get(const Vector& flat, int& off, Vector& v) {
  v = flat.segment(off, v.size());
  off += static_cast<int>(v.size());
}

}  // namespace

void MadeLayer::write_flat(Vector& flat, int& offset) const {
  for (std::size_t m = 0; m < W.size(); ++m) {
    put(flat, offset, W[m]);
    put(flat, offset, b[m]);
  }
  put(flat, offset, Vmu);
  put(flat, offset, cmu);
  put(flat, offset, Valpha);
  put(flat, offset, calpha);
}

void MadeLayer::read_flat(const Vector& flat, int& offset) {
  for (std::size_t m = 0; m < W.size(); ++m) {
    get(flat, offset, W[m]);
    get(flat, offset, b[m]);
  }
  get(flat, offset, Vmu);
  get(flat, offset, cmu);
  get(flat, offset, Valpha);
  get(flat, offset, calpha);
}

void MadeLayer::Grads::write_flat(Vector& flat, int& offset) const {
  for (std::size_t m = 0; m < dW.size(); ++m) {
    put(flat, offset, dW[m]);
    put(flat, offset, db[m]);
  }
  put(flat, offset, dVmu);
  put(flat, offset, dcmu);
  put(flat, offset, dValpha);
  put(flat, offset, dcalpha);
}

}  // namespace tsnl
