float v[N], w[N], a;

#pragma polca map F v w
for (int i = 0; i < N; i++)
#pragma polca def F
#pragma polca input v[i]
#pragma polca output w[i]
    w[i] = a * v[i];
