/* The public header must compile as C and the library must link from C. */
#include <rclqr/rclqr.h>
#include <stdio.h>

int main(void) {
  rclqr_problem* problem = NULL;
  rclqr_policy* policy = NULL;
  rclqr_evaluation ev;
  int rc = 1;
  if (rclqr_problem_uav(&problem) != RCLQR_OK) return 1;
  if (rclqr_problem_initial_policy(problem, &policy) == RCLQR_OK &&
      rclqr_evaluate(problem, policy, 2.0, &ev, NULL) == RCLQR_OK && ev.L > 0.0) {
    printf("L = %.6f, J = %.6f, Jc = %.6f\n", ev.L, ev.J, ev.Jc);
    rc = 0;
  }
  rclqr_policy_free(policy);
  rclqr_problem_free(problem);
  return rc;
}
