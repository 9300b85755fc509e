#include "disent/disent.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

#include "disent/data.hpp"
#include "disent/divergences.hpp"
#include "disent/error.hpp"
#include "disent/experiment.hpp"
#include "disent/model.hpp"

struct disent_dataset {
  disent::LabeledBatch batch;
};

struct disent_model {
  disent::ModelParams params;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
disent_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return DISENT_OK;
  } catch (const disent::Error& e) {
    g_last_error = e.what();
    return static_cast<disent_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return DISENT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DISENT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DISENT_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) disent::fail(disent::ErrorCode::kParameter, what);
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

disent::json parse_config(const char* config_json) {
  if (config_json == nullptr || *config_json == '\0') return disent::json::object();
  try {
    return disent::json::parse(config_json);
  } catch (const disent::json::parse_error& e) {
    disent::fail(disent::ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* disent_version(void) { return "0.1.0"; }

const char* disent_last_error(void) { return g_last_error.c_str(); }

const char* disent_status_name(disent_status status) {
  if (status == DISENT_OK) return "ok";
  return disent::error_code_name(static_cast<disent::ErrorCode>(status));
}

disent_status disent_divergence(disent_measure measure, const double* z0, size_t n0,
                                const double* z1, size_t n1, size_t d, double* value,
                                double* grad0, double* grad1) {
  return guarded([&] {
    require(z0 != nullptr && z1 != nullptr && value != nullptr, "null pointer argument");
    require(measure >= DISENT_MEASURE_MMD && measure <= DISENT_MEASURE_GAUSSIAN_W,
            "unknown measure");
    const disent::Matrix a(n0, d, std::vector<double>(z0, z0 + n0 * d));
    const disent::Matrix b(n1, d, std::vector<double>(z1, z1 + n1 * d));
    const auto r = disent::compute_measure(static_cast<disent::Measure>(measure), a, b, {});
    *value = r.value;
    if (grad0 != nullptr) std::copy(r.grad0.data().begin(), r.grad0.data().end(), grad0);
    if (grad1 != nullptr) std::copy(r.grad1.data().begin(), r.grad1.data().end(), grad1);
  });
}

disent_status disent_dataset_read_csv(const char* path, disent_dataset** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null pointer argument");
    *out = nullptr;
    *out = new disent_dataset{disent::read_csv(path)};
  });
}

disent_status disent_dataset_write_csv(const disent_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds != nullptr && path != nullptr, "null pointer argument");
    disent::write_csv(ds->batch, path);
  });
}

size_t disent_dataset_rows(const disent_dataset* ds) { return ds ? ds->batch.size() : 0; }

size_t disent_dataset_cols(const disent_dataset* ds) { return ds ? ds->batch.samples.cols() : 0; }

void disent_dataset_free(disent_dataset* ds) { delete ds; }

disent_status disent_model_load(const char* path, disent_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null pointer argument");
    *out = nullptr;
    *out = new disent_model{disent::load_checkpoint(path)};
  });
}

disent_status disent_model_save(const disent_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null pointer argument");
    disent::save_checkpoint(model->params, path);
  });
}

size_t disent_model_input_dim(const disent_model* model) {
  return model ? model->params.encoder.input_width() : 0;
}

size_t disent_model_embedding_dim(const disent_model* model) {
  return model ? model->params.encoder.output_width() : 0;
}

disent_status disent_model_encode(const disent_model* model, const double* x, size_t n, double* z) {
  return guarded([&] {
    require(model != nullptr && x != nullptr && z != nullptr, "null pointer argument");
    const std::size_t d = model->params.encoder.input_width();
    const disent::Matrix in(n, d, std::vector<double>(x, x + n * d));
    const disent::Matrix out = model->params.encoder.forward(in);
    std::copy(out.data().begin(), out.data().end(), z);
  });
}

void disent_model_free(disent_model* model) { delete model; }

disent_status disent_run_command(const char* command, const char* config_json, char** result_json) {
  return guarded([&] {
    require(command != nullptr && result_json != nullptr, "null pointer argument");
    *result_json = nullptr;
    const disent::json result = disent::run_command(command, parse_config(config_json));
    *result_json = copy_string(result.dump(2));
  });
}

disent_status disent_resolve_config(const char* config_json, char** result_json) {
  return guarded([&] {
    require(result_json != nullptr, "null pointer argument");
    *result_json = nullptr;
    const auto cfg = disent::resolve_config(parse_config(config_json));
    *result_json = copy_string(disent::to_json(cfg).dump(2));
  });
}

void disent_string_free(char* s) { delete[] s; }

}  // extern "C"
