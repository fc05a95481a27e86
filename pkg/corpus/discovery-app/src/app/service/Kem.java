package app.service;

import java.security.PrivateKey;
import java.security.PublicKey;
import javax.crypto.KEM;
import javax.crypto.SecretKey;

public class Kem {
    public KEM.Encapsulated send(PublicKey peer) throws Exception {
        KEM kem = KEM.getInstance("DHKEM");
        KEM.Encapsulator encapsulator = kem.newEncapsulator(peer);
        return encapsulator.encapsulate();
    }

    public SecretKey receive(PrivateKey mine, byte[] encapsulation) throws Exception {
        KEM kem = KEM.getInstance("DHKEM");
        KEM.Decapsulator decapsulator = kem.newDecapsulator(mine);
        return decapsulator.decapsulate(encapsulation);
    }
}
