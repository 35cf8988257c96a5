#include <math.h>
#include <stdio.h>
#include <string.h>

#include "garma.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond,          \
              garma_last_error());                                    \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  GarmaFamily fam = {GARMA_FAMILY_KIND_POISSON, 0, 0.0};

  uint64_t y[2] = {1, 1};
  GarmaSeries *s = NULL;
  CHECK(garma_series_new(y, 2, NULL, 0, 0.3, &s) == GARMA_STATUS_OK);
  double ll = 0.0;
  CHECK(garma_log_likelihood(s, fam, 0.0, NULL, 0, NULL, 0, NULL, 0, &ll) ==
        GARMA_STATUS_OK);
  CHECK(fabs(ll + 2.0) < 1e-12);
  garma_series_free(s);

  double phi[1] = {0.3};
  CHECK(garma_simulate(fam, 0.5, phi, 1, NULL, 0, 200, 100, 0.3, 7, &s) ==
        GARMA_STATUS_OK);
  CHECK(garma_series_len(s) == 200);

  GarmaSamplerConfig cfg = garma_sampler_config_default();
  cfg.p_max = 1;
  cfg.q_max = 1;
  cfg.iters = 500;
  GarmaChain *chain = NULL;
  CHECK(garma_run_chain(s, fam, &cfg, &chain) == GARMA_STATUS_OK);
  CHECK(garma_chain_rows(chain) == 500);
  CHECK(garma_chain_dim(chain) == 3);
  CHECK(strcmp(garma_chain_coef_name(chain, 1), "phi1") == 0);

  GarmaChain *kept = NULL;
  CHECK(garma_chain_burn_thin(chain, 100, 2, &kept) == GARMA_STATUS_OK);
  CHECK(garma_chain_rows(kept) == 200);
  GarmaCoefSummary sum[3];
  CHECK(garma_chain_summary(kept, 0.95, sum, 3) == GARMA_STATUS_OK);
  CHECK(sum[0].hpd_lo <= sum[0].hpd_hi);

  CHECK(garma_chain_burn_thin(chain, 500, 1, &kept) != GARMA_STATUS_OK);
  CHECK(strlen(garma_last_error()) > 0);

  garma_chain_free(kept);
  garma_chain_free(chain);
  garma_series_free(s);
  printf("ok %s\n", garma_version());
  return 0;
}
