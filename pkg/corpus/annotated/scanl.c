float v[N], w[N], a;

#pragma polca scanl F a v w
for (int i = 0; i < N - 1; i++)
#pragma polca def F
#pragma polca input v[i]
#pragma polca input w[i]
#pragma polca output w[i + 1]
    w[i + 1] = w[i] + v[i];
