#include "disslab/config.hpp"
#include "disslab/errors.hpp"

#include <cstdio>
#include <functional>
#include <fstream>
#include <set>
#include <sstream>

namespace disslab {

namespace {

struct Field {
  std::string section, key; // section "" for globals
  std::function<void(Config &, const YAML::Node &)> read;
  std::function<void(const Config &, YAML::Node &)> write;
};

template <class T, class Get> Field bind(std::string sec, std::string key, Get get) {
  Field f;
  f.section = sec;
  f.key = key;
  f.read = [get, sec, key](Config &c, const YAML::Node &n) {
    try {
      get(c) = n.as<T>();
    } catch (const YAML::Exception &) {
      fail_config("bad_value", "cannot read " + (sec.empty() ? key : sec + "." + key) + " from '" +
                                   YAML::Dump(n) + "'");
    }
  };
  f.write = [get](const Config &c, YAML::Node &n) { n = get(const_cast<Config &>(c)); };
  return f;
}

const std::vector<Field> &fields() {
  static const std::vector<Field> fs = [] {
    std::vector<Field> v;
    v.push_back(bind<std::string>("", "out", [](Config &c) -> auto & { return c.out; }));
    v.push_back(bind<int>("", "workers", [](Config &c) -> auto & { return c.workers; }));
    v.push_back(bind<std::uint64_t>("", "seed", [](Config &c) -> auto & { return c.seed; }));

    v.push_back(bind<int>("lp", "base", [](Config &c) -> auto & { return c.lp.base; }));
    v.push_back(bind<int>("lp", "grid", [](Config &c) -> auto & { return c.lp.grid; }));
    v.push_back(bind<int>("lp", "trials", [](Config &c) -> auto & { return c.lp.trials; }));
    v.push_back(bind<int>("lp", "corpus", [](Config &c) -> auto & { return c.lp.corpus; }));
    v.push_back(bind<double>("lp", "s", [](Config &c) -> auto & { return c.lp.s; }));
    v.push_back(bind<double>("lp", "p", [](Config &c) -> auto & { return c.lp.p; }));
    v.push_back(bind<std::string>("lp", "snapshot", [](Config &c) -> auto & { return c.lp.snapshot; }));

    v.push_back(bind<int>("mixing", "base", [](Config &c) -> auto & { return c.mixing.base; }));
    v.push_back(bind<int>("mixing", "grid", [](Config &c) -> auto & { return c.mixing.grid; }));
    v.push_back(bind<int>("mixing", "first_stage", [](Config &c) -> auto & { return c.mixing.first_stage; }));
    v.push_back(bind<int>("mixing", "last_stage", [](Config &c) -> auto & { return c.mixing.last_stage; }));
    v.push_back(bind<double>("mixing", "tail_tol", [](Config &c) -> auto & { return c.mixing.tail_tol; }));
    v.push_back(bind<double>("mixing", "linf_cap", [](Config &c) -> auto & { return c.mixing.linf_cap; }));

    auto c1 = [](Config &c) -> Construction1Section & { return c.construction1; };
    v.push_back(bind<int>("construction1", "base", [c1](Config &c) -> auto & { return c1(c).base; }));
    v.push_back(bind<std::vector<int>>("construction1", "m_list", [c1](Config &c) -> auto & { return c1(c).m_list; }));
    v.push_back(bind<std::string>("construction1", "weights", [c1](Config &c) -> auto & { return c1(c).weights; }));
    v.push_back(bind<int>("construction1", "grid_max", [c1](Config &c) -> auto & { return c1(c).grid_max; }));
    v.push_back(bind<int>("construction1", "resolution_factor",
                          [c1](Config &c) -> auto & { return c1(c).resolution_factor; }));
    v.push_back(bind<double>("construction1", "tail_tol", [c1](Config &c) -> auto & { return c1(c).tail_tol; }));
    v.push_back(bind<double>("construction1", "cfl", [c1](Config &c) -> auto & { return c1(c).cfl; }));
    v.push_back(bind<std::string>("construction1", "variant_weights",
                                  [c1](Config &c) -> auto & { return c1(c).variant_weights; }));
    v.push_back(bind<int>("construction1", "variant_base", [c1](Config &c) -> auto & { return c1(c).variant_base; }));
    v.push_back(bind<std::vector<int>>("construction1", "variant_m_list",
                                       [c1](Config &c) -> auto & { return c1(c).variant_m_list; }));
    v.push_back(bind<int>("construction1", "variant_grid_max",
                          [c1](Config &c) -> auto & { return c1(c).variant_grid_max; }));
    v.push_back(bind<bool>("construction1", "snapshots", [c1](Config &c) -> auto & { return c1(c).snapshots; }));

    auto c2 = [](Config &c) -> Construction2Section & { return c.construction2; };
    v.push_back(bind<double>("construction2", "beta", [c2](Config &c) -> auto & { return c2(c).beta; }));
    v.push_back(bind<double>("construction2", "eps", [c2](Config &c) -> auto & { return c2(c).eps; }));
    v.push_back(bind<int>("construction2", "N", [c2](Config &c) -> auto & { return c2(c).N; }));
    v.push_back(bind<int>("construction2", "n_max", [c2](Config &c) -> auto & { return c2(c).n_max; }));
    v.push_back(bind<std::vector<double>>("construction2", "h_values",
                                          [c2](Config &c) -> auto & { return c2(c).h_values; }));
    v.push_back(bind<std::vector<double>>("construction2", "r_list", [c2](Config &c) -> auto & { return c2(c).r_list; }));
    v.push_back(bind<std::vector<int>>("construction2", "m_list", [c2](Config &c) -> auto & { return c2(c).m_list; }));
    v.push_back(bind<double>("construction2", "trend_beta", [c2](Config &c) -> auto & { return c2(c).trend_beta; }));
    v.push_back(bind<int>("construction2", "test_fields", [c2](Config &c) -> auto & { return c2(c).test_fields; }));
    v.push_back(bind<int>("construction2", "template_iterations",
                          [c2](Config &c) -> auto & { return c2(c).template_iterations; }));
    return v;
  }();
  return fs;
}

bool is_section(const std::string &k) {
  return k == "lp" || k == "mixing" || k == "construction1" || k == "construction2";
}

const Field *find(const std::string &sec, const std::string &key) {
  for (const auto &f : fields())
    if (f.section == sec && f.key == key)
      return &f;
  return nullptr;
}

void validate(const Config &c) {
  if (c.workers < 1)
    fail_config("bad_value", "workers must be >= 1");
  if (c.lp.base != 2 && c.lp.base != 5)
    fail_config("bad_value", "lp.base must be 2 or 5");
  if (c.lp.trials < 0 || c.lp.corpus < 0)
    fail_config("bad_value", "lp trial counts must be nonnegative");
  if (c.mixing.first_stage < 0 || c.mixing.last_stage < c.mixing.first_stage)
    fail_config("bad_value", "mixing stages must satisfy 0 <= first_stage <= last_stage");
  if (c.construction2.test_fields < 0)
    fail_config("bad_value", "construction2.test_fields must be nonnegative");
}

} // namespace

YAML::Node Config::tree() const {
  YAML::Node root;
  for (const auto &f : fields()) {
    YAML::Node n;
    f.write(*this, n);
    if (f.section.empty())
      root[f.key] = n;
    else
      root[f.section][f.key] = n;
  }
  return root;
}

std::string Config::dump() const {
  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << tree();
  return em.c_str();
}

std::string Config::hash() const {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016zx", std::hash<std::string>{}(dump()));
  return buf;
}

Config config_from_yaml(const YAML::Node &root) {
  Config c;
  if (!root || root.IsNull())
    return c;
  if (!root.IsMap())
    fail_config("bad_config", "configuration must be a mapping");
  for (const auto &kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (is_section(key)) {
      if (kv.second.IsNull())
        continue;
      if (!kv.second.IsMap())
        fail_config("bad_config", "section " + key + " must be a mapping");
      for (const auto &inner : kv.second) {
        const std::string k2 = inner.first.as<std::string>();
        const Field *f = find(key, k2);
        if (!f)
          fail_config("unknown_key", "unknown key " + key + "." + k2);
        f->read(c, inner.second);
      }
      continue;
    }
    const Field *f = find("", key);
    if (!f)
      fail_config("unknown_key", "unknown key " + key);
    f->read(c, kv.second);
  }
  validate(c);
  return c;
}

void apply_override(YAML::Node &root, const std::string &assignment, const std::string &section) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail_config("bad_override", "override must look like key=value: '" + assignment + "'");
  std::string key = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception &e) {
    fail_config("bad_override", "cannot parse value in '" + assignment + "': " + e.what());
  }
  std::string sec, k = key;
  auto dot = key.find('.');
  if (dot != std::string::npos) {
    sec = key.substr(0, dot);
    k = key.substr(dot + 1);
  } else if (!section.empty() && find(section, key)) {
    sec = section;
  }
  if (!find(sec, k))
    fail_config("unknown_key", "unknown key " + key);
  if (sec.empty())
    root[k] = value;
  else
    root[sec][k] = value;
}

Config load_config(const std::string &path, const std::vector<std::string> &overrides, const std::string &section) {
  std::string file = (path.empty() || path == "default") ? std::string(DISSLAB_DEFAULT_CONFIG) : path;
  YAML::Node root;
  std::ifstream in(file);
  if (!in)
    fail_config("bad_config", "cannot open configuration " + file);
  try {
    root = YAML::Load(in);
  } catch (const YAML::Exception &e) {
    fail_config("bad_config", "cannot parse " + file + ": " + e.what());
  }
  if (!root || root.IsNull())
    root = YAML::Node(YAML::NodeType::Map);
  // validate the file alone first, so bad keys are reported against it
  config_from_yaml(root);
  for (const auto &o : overrides)
    apply_override(root, o, section);
  return config_from_yaml(root);
}

} // namespace disslab
