#pragma once

namespace bilo {

// Published decaying schedules of the two stochastic-approximation baselines.

double bsa_alpha(int k, double d_alpha);       // d_alpha / (1+k)^{1/2}
int bsa_inner_steps(int k);                    // ceil((k+1)^{1/2})
double bsa_beta(int t, double d_beta);         // d_beta / (t+2), t the inner index

double ttsa_alpha(int k, double d_alpha);      // d_alpha / (1+k)^{3/5}
double ttsa_beta(int k, double d_beta);        // d_beta / (1+k)^{2/5}

}  // namespace bilo
