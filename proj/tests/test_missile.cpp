#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "acrl/missile.hpp"

using namespace acrl;

TEST_CASE("drag term matches the quadratic formula exactly") {
  MissileConfig cfg;
  Propulsion p = propulsion(0.0, 600.0, cfg);
  // same expression, same association order: bitwise equality expected
  CHECK(p.drag == 0.5 * 0.607 * 600.0 * 600.0 * 0.0324 * 0.9);
  CHECK(propulsion(20.0, 600.0, cfg).drag == p.drag);  // drag independent of time
  CHECK(propulsion(0.0, 0.0, cfg).drag == 0.0);
}

TEST_CASE("thrust cuts and mass freezes at burnout") {
  MissileConfig cfg;
  CHECK(propulsion(0.0, 300.0, cfg).thrust == 12000.0);
  CHECK(propulsion(0.0, 300.0, cfg).mass == 170.0);
  CHECK(propulsion(6.0, 300.0, cfg).mass == 170.0 - 5.0 * 6.0);
  // boundary belongs to the boost phase
  CHECK(propulsion(12.0, 300.0, cfg).thrust == 12000.0);
  CHECK(propulsion(12.0, 300.0, cfg).mass == 110.0);
  CHECK(propulsion(12.0 + 1e-12, 300.0, cfg).thrust == 0.0);
  CHECK(propulsion(12.0 + 1e-12, 300.0, cfg).mass == 110.0);
  CHECK(propulsion(27.0, 300.0, cfg).mass == 110.0);
  CHECK(propulsion(27.0, 300.0, cfg).thrust == 0.0);
}

TEST_CASE("line of sight rates from hand geometry") {
  MissileConfig cfg;
  MissileState m;
  m.v = 0.0;  // stationary observer isolates the target's contribution

  SUBCASE("pure lateral crossing") {
    LineOfSight los = line_of_sight(m, Vec3(1000.0, 0.0, 0.0), Vec3(0.0, 100.0, 0.0));
    CHECK(los.range == doctest::Approx(1000.0));
    CHECK(los.beta == doctest::Approx(0.0));
    CHECK(los.eps == doctest::Approx(0.0));
    CHECK(los.beta_dot == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(los.eps_dot == doctest::Approx(0.0));
  }

  SUBCASE("pure vertical rate at 45 degrees elevation") {
    LineOfSight los = line_of_sight(m, Vec3(1000.0, 0.0, 1000.0), Vec3(0.0, 0.0, 10.0));
    CHECK(los.eps == doctest::Approx(kPi / 4.0).epsilon(1e-12));
    CHECK(los.eps_dot == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(los.beta_dot == doctest::Approx(0.0));
  }

  SUBCASE("closing geometry has zero rates") {
    m.v = 300.0;  // flying straight at the target
    LineOfSight los = line_of_sight(m, Vec3(5000.0, 0.0, 0.0), Vec3(0.0, 0.0, 0.0));
    CHECK(los.beta_dot == doctest::Approx(0.0));
    CHECK(los.eps_dot == doctest::Approx(0.0));
  }

  SUBCASE("target overhead is degenerate") {
    CHECK_THROWS_AS(line_of_sight(m, Vec3(0.0, 0.0, 5000.0), Vec3(0.0, 0.0, 0.0)),
                    std::domain_error);
  }
}

TEST_CASE("proportional navigation command values") {
  MissileConfig cfg;
  MissileState m;
  m.v = 600.0;
  GuidanceCommand prev{0.0, 0.0};

  SUBCASE("lateral command proportional to LOS azimuth rate") {
    LineOfSight los;
    los.beta_dot = 0.02;
    GuidanceCommand cmd = png_commands(los, m, cfg, 0.0, prev);
    CHECK(cmd.n_mc == doctest::Approx(4.0 * (600.0 / 9.81) * 0.02).epsilon(1e-12));
    CHECK(cmd.n_mh == doctest::Approx(0.0));
  }

  SUBCASE("vertical command proportional to LOS elevation rate") {
    LineOfSight los;
    los.eps_dot = 0.01;
    GuidanceCommand cmd = png_commands(los, m, cfg, 0.0, prev);
    CHECK(cmd.n_mh == doctest::Approx(600.0 * 4.0 * 0.01 / 9.81).epsilon(1e-12));
    CHECK(cmd.n_mc == doctest::Approx(0.0));
  }

  SUBCASE("target pitch scales the lateral gain") {
    LineOfSight los;
    los.beta_dot = 0.02;
    GuidanceCommand cmd = png_commands(los, m, cfg, 0.5, prev);
    CHECK(cmd.n_mc ==
          doctest::Approx(4.0 * (600.0 * std::cos(0.5) / 9.81) * 0.02).epsilon(1e-12));
  }

  SUBCASE("commands saturate at the cap") {
    LineOfSight los;
    los.beta_dot = 10.0;
    los.eps_dot = -10.0;
    GuidanceCommand cmd = png_commands(los, m, cfg, 0.0, prev);
    CHECK(cmd.n_mc == 40.0);
    CHECK(cmd.n_mh == -40.0);
  }

  SUBCASE("previous command held through the lead-angle pole") {
    LineOfSight los;
    los.eps = kPi / 2.0;  // cos(eps + beta) ~ 0
    los.beta = 0.0;
    los.beta_dot = 5.0;
    los.eps_dot = 5.0;
    GuidanceCommand held = png_commands(los, m, cfg, 0.0, {3.25, -1.5});
    CHECK(held.n_mc == 3.25);
    CHECK(held.n_mh == -1.5);
  }
}

TEST_CASE("segment closest approach") {
  CHECK(segment_min_distance(Vec3(-100.0, 25.0, 0.0), Vec3(100.0, 25.0, 0.0)) ==
        doctest::Approx(25.0).epsilon(1e-12));
  // minimum at an endpoint when the foot falls outside the segment
  CHECK(segment_min_distance(Vec3(100.0, 50.0, 0.0), Vec3(200.0, 50.0, 0.0)) ==
        doctest::Approx(std::sqrt(100.0 * 100.0 + 50.0 * 50.0)).epsilon(1e-12));
  // degenerate segment falls back to the point distance
  CHECK(segment_min_distance(Vec3(3.0, 4.0, 0.0), Vec3(3.0, 4.0, 0.0)) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(segment_min_distance(Vec3(-1.0, 0.0, 0.0), Vec3(1.0, 0.0, 0.0)) == doctest::Approx(0.0));
}

TEST_CASE("straight flyby records the lateral offset as closest approach") {
  MissileConfig cfg;
  AircraftState shooter;
  shooter.x = 0.0;
  shooter.y = 0.0;
  shooter.z = 5000.0;
  shooter.v = 600.0;
  MissileState m = launch_missile(shooter);
  CHECK(m.active);
  CHECK(m.t_flight == 0.0);
  CHECK(m.min_approach == 1e30);

  // hold level, no turn: the missile flies the line y=0, z=5000
  GuidanceCommand level{0.0, 1.0};
  Vec3 target(1000.0, 25.0, 5000.0);
  MissileVerdict v = MissileVerdict::InFlight;
  for (int i = 0; i < 100 && m.x < 2000.0; ++i) {
    m = step_missile(m, level, cfg, 0.05, target, target);
    v = check_fuze(m, cfg);
  }
  CHECK(m.min_approach == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(v == MissileVerdict::Hit);  // 25 m < 30 m fuze radius
  CHECK(std::fabs(m.y) < 1e-9);
  CHECK(std::fabs(m.z - 5000.0) < 1e-9);
}

TEST_CASE("moving-target closest approach uses the relative segment") {
  MissileConfig cfg;
  // head-on pass entirely inside one step: endpoints are far, mid-step is close
  MissileState m;
  m.x = -20.0;
  m.y = 10.0;
  m.z = 5000.0;
  m.v = 600.0;
  m.active = true;
  m.min_approach = 1e30;
  // target closing head-on, so relative speed 1200 m/s: 60 m per 0.05 s step
  Vec3 t0(m.x + 40.0, 0.0, 5000.0);
  Vec3 t1(t0.x() - 30.0, 0.0, 5000.0);
  GuidanceCommand level{0.0, 1.0};
  MissileState n = step_missile(m, level, cfg, 0.05, t0, t1);
  // relative track passes abeam at 10 m even though both endpoints are farther
  CHECK(n.min_approach == doctest::Approx(10.0).epsilon(1e-6));
  double d0 = (missile_position(m) - t0).norm();
  double d1 = (missile_position(n) - t1).norm();
  CHECK(n.min_approach < d0);
  CHECK(n.min_approach < d1);
}

TEST_CASE("fuze verdict transitions") {
  MissileConfig cfg;
  MissileState m;
  m.min_approach = 31.0;
  m.t_flight = 5.0;
  CHECK(check_fuze(m, cfg) == MissileVerdict::InFlight);
  m.min_approach = 30.0;  // boundary counts as a hit
  CHECK(check_fuze(m, cfg) == MissileVerdict::Hit);
  m.min_approach = 1e30;
  m.t_flight = 27.0;  // timeout is strict
  CHECK(check_fuze(m, cfg) == MissileVerdict::InFlight);
  m.t_flight = 27.0 + 1e-9;
  CHECK(check_fuze(m, cfg) == MissileVerdict::Missed);
  // a hit earlier in flight wins over a later timeout
  m.min_approach = 10.0;
  m.t_flight = 30.0;
  CHECK(check_fuze(m, cfg) == MissileVerdict::Hit);
}

TEST_CASE("speed floor keeps the coasting missile integrable") {
  MissileConfig cfg;
  MissileState m;
  m.v = cfg.min_speed;
  m.z = 5000.0;
  m.t_flight = 20.0;  // past burnout, drag only
  m.active = true;
  GuidanceCommand level{0.0, 1.0};
  Vec3 far(1e6, 1e6, 5000.0);
  for (int i = 0; i < 200; ++i) {
    m = step_missile(m, level, cfg, 0.05, far, far);
    CHECK(m.v >= cfg.min_speed);
  }
  CHECK(m.v == cfg.min_speed);
}

TEST_CASE("boost accelerates the missile past the shooter speed") {
  MissileConfig cfg;
  AircraftState shooter;
  shooter.z = 6000.0;
  shooter.v = 300.0;
  MissileState m = launch_missile(shooter);
  GuidanceCommand level{0.0, 1.0};
  Vec3 far(1e6, 0.0, 6000.0);
  for (int i = 0; i < 40; ++i) m = step_missile(m, level, cfg, 0.05, far, far);
  CHECK(m.t_flight == doctest::Approx(2.0));
  CHECK(m.v > 600.0);  // ~2 s of boost roughly doubles launch speed
}

TEST_CASE("coarse step integration tracks a fine-step reference") {
  MissileConfig cfg;
  AircraftState shooter;
  shooter.z = 6000.0;
  shooter.v = 300.0;
  shooter.gamma = 0.1;
  shooter.phi = 0.3;
  MissileState coarse = launch_missile(shooter);
  MissileState fine = coarse;
  GuidanceCommand cmd{2.0, 1.5};  // constant gentle turn-and-climb
  Vec3 far(1e9, 1e9, 1e9);

  for (int i = 0; i < 100; ++i) coarse = step_missile(coarse, cmd, cfg, 0.05, far, far);
  for (int i = 0; i < 5000; ++i) fine = step_missile(fine, cmd, cfg, 0.001, far, far);

  CHECK(coarse.t_flight == doctest::Approx(fine.t_flight));
  CHECK(std::fabs(coarse.x - fine.x) < 0.01);
  CHECK(std::fabs(coarse.y - fine.y) < 0.01);
  CHECK(std::fabs(coarse.z - fine.z) < 0.01);
  CHECK(std::fabs(coarse.v - fine.v) < 0.01);
}
