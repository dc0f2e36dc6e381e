#include <math.h>

int Operator(float *u_vec, float *m_vec, float *eta_vec, float *src_vec, int *src_ci_vec, float *src_w_vec, float *rec_vec, int *rec_ci_vec, float *rec_w_vec)
{
  float (*u)[24][24][20] = (float (*)[24][24][20]) u_vec;
  float (*m)[24][20] = (float (*)[24][20]) m_vec;
  float (*eta)[24][20] = (float (*)[24][20]) eta_vec;
  float (*src)[1] = (float (*)[1]) src_vec;
  int (*src_ci)[3] = (int (*)[3]) src_ci_vec;
  float (*src_w)[8] = (float (*)[8]) src_w_vec;
  float (*rec)[8] = (float (*)[8]) rec_vec;
  int (*rec_ci)[3] = (int (*)[3]) rec_ci_vec;
  float (*rec_w)[8] = (float (*)[8]) rec_w_vec;
  {
    int t0;
    int t1;
    int t2;
    #pragma omp parallel
    for (int i4 = 0; i4 < 12; i4 += 1)
    {
      #pragma omp single
      {
        t0 = (i4 + 2) % 3;
        t1 = (i4) % 3;
        t2 = (i4 + 1) % 3;
      }
      #pragma omp for schedule(static)
      for (int i1 = 1; i1 < 23; i1 += 1)
      {
        for (int i2 = 1; i2 < 23; i2 += 1)
        {
          #pragma omp simd aligned(u,m,eta:64)
          for (int i3 = 1; i3 < 19; i3 += 1)
          {
            const float temp0 = 1.6037508e2F*eta[i1][i2][i3];
            const float temp1 = 1.0288066e5F*m[i1][i2][i3];
            const float temp2 = temp0 + temp1;
            const float temp3 = 1.0F/temp2;
            u[t2][i1][i2][i3] = 1.6037508e2F*temp3*eta[i1][i2][i3]*u[t0][i1][i2][i3] - 1.0288066e5F*temp3*m[i1][i2][i3]*u[t0][i1][i2][i3] + 2.0576131e5F*temp3*m[i1][i2][i3]*u[t1][i1][i2][i3] - 2.6666667e-2F*temp3*u[t1][i1][i2][i3] + 4.4444446e-3F*temp3*u[t1][i1][i2][i3 - 1] + 4.4444446e-3F*temp3*u[t1][i1][i2][i3 + 1] + 4.4444446e-3F*temp3*u[t1][i1][i2 - 1][i3] + 4.4444446e-3F*temp3*u[t1][i1][i2 + 1][i3] + 4.4444446e-3F*temp3*u[t1][i1 - 1][i2][i3] + 4.4444446e-3F*temp3*u[t1][i1 + 1][i2][i3];
          }
        }
      }
      #pragma omp single
      for (int p = 0; p < 1; p += 1)
      {
        u[t2][src_ci[p][0]][src_ci[p][1]][src_ci[p][2]] = 9.72e-6F*src[i4][p]*src_w[p][0]/m[src_ci[p][0]][src_ci[p][1]][src_ci[p][2]] + u[t2][src_ci[p][0]][src_ci[p][1]][src_ci[p][2]];
        u[t2][src_ci[p][0] + 1][src_ci[p][1]][src_ci[p][2]] = 9.72e-6F*src[i4][p]*src_w[p][1]/m[src_ci[p][0] + 1][src_ci[p][1]][src_ci[p][2]] + u[t2][src_ci[p][0] + 1][src_ci[p][1]][src_ci[p][2]];
        u[t2][src_ci[p][0]][src_ci[p][1] + 1][src_ci[p][2]] = 9.72e-6F*src[i4][p]*src_w[p][2]/m[src_ci[p][0]][src_ci[p][1] + 1][src_ci[p][2]] + u[t2][src_ci[p][0]][src_ci[p][1] + 1][src_ci[p][2]];
        u[t2][src_ci[p][0] + 1][src_ci[p][1] + 1][src_ci[p][2]] = 9.72e-6F*src[i4][p]*src_w[p][3]/m[src_ci[p][0] + 1][src_ci[p][1] + 1][src_ci[p][2]] + u[t2][src_ci[p][0] + 1][src_ci[p][1] + 1][src_ci[p][2]];
        u[t2][src_ci[p][0]][src_ci[p][1]][src_ci[p][2] + 1] = 9.72e-6F*src[i4][p]*src_w[p][4]/m[src_ci[p][0]][src_ci[p][1]][src_ci[p][2] + 1] + u[t2][src_ci[p][0]][src_ci[p][1]][src_ci[p][2] + 1];
        u[t2][src_ci[p][0] + 1][src_ci[p][1]][src_ci[p][2] + 1] = 9.72e-6F*src[i4][p]*src_w[p][5]/m[src_ci[p][0] + 1][src_ci[p][1]][src_ci[p][2] + 1] + u[t2][src_ci[p][0] + 1][src_ci[p][1]][src_ci[p][2] + 1];
        u[t2][src_ci[p][0]][src_ci[p][1] + 1][src_ci[p][2] + 1] = 9.72e-6F*src[i4][p]*src_w[p][6]/m[src_ci[p][0]][src_ci[p][1] + 1][src_ci[p][2] + 1] + u[t2][src_ci[p][0]][src_ci[p][1] + 1][src_ci[p][2] + 1];
        u[t2][src_ci[p][0] + 1][src_ci[p][1] + 1][src_ci[p][2] + 1] = 9.72e-6F*src[i4][p]*src_w[p][7]/m[src_ci[p][0] + 1][src_ci[p][1] + 1][src_ci[p][2] + 1] + u[t2][src_ci[p][0] + 1][src_ci[p][1] + 1][src_ci[p][2] + 1];
      }
      #pragma omp single
      for (int p = 0; p < 8; p += 1)
      {
        rec[i4][p] = rec_w[p][0]*u[t2][rec_ci[p][0]][rec_ci[p][1]][rec_ci[p][2]] + rec_w[p][1]*u[t2][rec_ci[p][0] + 1][rec_ci[p][1]][rec_ci[p][2]] + rec_w[p][2]*u[t2][rec_ci[p][0]][rec_ci[p][1] + 1][rec_ci[p][2]] + rec_w[p][3]*u[t2][rec_ci[p][0] + 1][rec_ci[p][1] + 1][rec_ci[p][2]] + rec_w[p][4]*u[t2][rec_ci[p][0]][rec_ci[p][1]][rec_ci[p][2] + 1] + rec_w[p][5]*u[t2][rec_ci[p][0] + 1][rec_ci[p][1]][rec_ci[p][2] + 1] + rec_w[p][6]*u[t2][rec_ci[p][0]][rec_ci[p][1] + 1][rec_ci[p][2] + 1] + rec_w[p][7]*u[t2][rec_ci[p][0] + 1][rec_ci[p][1] + 1][rec_ci[p][2] + 1];
      }
    }
  }
  return 0;
}
