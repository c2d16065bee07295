float v[N], w[N], z[N];

#pragma polca zipWith F v w z
for (int i = 0; i < N; i++)
#pragma polca def F
#pragma polca input v[i]
#pragma polca input w[i]
#pragma polca output z[i]
    z[i] = v[i] + w[i];
